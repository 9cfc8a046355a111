#include "igdts/image_codec.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "igdts/errors.hpp"

namespace igdts {

namespace {

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Header token reader for PNM: skips whitespace and '#' comments.
class PnmHeader {
 public:
  explicit PnmHeader(std::istream& in) : in_(in) {}

  int next_int() {
    int c = in_.get();
    while (c != EOF) {
      if (c == '#') {
        while (c != EOF && c != '\n') c = in_.get();
      } else if (!std::isspace(c)) {
        break;
      }
      c = in_.get();
    }
    if (c == EOF || !std::isdigit(c)) throw IoError("bad PNM header");
    long value = 0;
    while (c != EOF && std::isdigit(c)) {
      value = value * 10 + (c - '0');
      if (value > (1L << 30)) throw IoError("bad PNM header");
      c = in_.get();
    }
    // Exactly one whitespace byte separates the header from binary data.
    return static_cast<int>(value);
  }

 private:
  std::istream& in_;
};

RasterImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + quoted(path));
  char magic[2];
  in.read(magic, 2);
  const int kind = magic[1] - '0';
  RasterImage img;
  try {
    PnmHeader header(in);
    img.width = header.next_int();
    img.height = header.next_int();
    img.max_value = header.next_int();
  } catch (const IoError&) {
    throw IoError("malformed PNM header in " + quoted(path));
  }
  if (img.width <= 0 || img.height <= 0 || img.max_value <= 0 || img.max_value > 65535)
    throw IoError("unsupported PNM dimensions or depth in " + quoted(path));
  img.channels = (kind == 3 || kind == 6) ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(count);

  if (kind == 5 || kind == 6) {
    const int bytes = img.max_value > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw IoError("truncated image data in " + quoted(path));
    for (std::size_t i = 0; i < count; ++i)
      img.samples[i] = bytes == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long v;
      if (!(in >> v) || v < 0 || v > img.max_value) throw IoError("bad sample in " + quoted(path));
      img.samples[i] = static_cast<std::uint16_t>(v);
    }
  }
  return img;
}

RasterImage read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("cannot decode PNG " + quoted(path) + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  RasterImage img;
  img.width = static_cast<int>(image.width);
  img.height = static_cast<int>(image.height);
  img.channels = color ? 3 : 1;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + quoted(path) + ": " + image.message);
  }
  img.samples.assign(buffer.begin(), buffer.end());
  return img;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

RasterImage read_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "rb"), &std::fclose);
  if (!file) throw IoError("cannot open image " + quoted(path));

  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  RasterImage img;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("cannot decode JPEG " + quoted(path) + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img.width = static_cast<int>(cinfo.output_width);
  img.height = static_cast<int>(cinfo.output_height);
  img.channels = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<JSAMPLE> row(stride);
  img.samples.reserve(stride * img.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW rows[1] = {row.data()};
    jpeg_read_scanlines(&cinfo, rows, 1);
    img.samples.insert(img.samples.end(), row.begin(), row.end());
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::vector<std::uint8_t> to_bytes(const RasterImage& image) {
  std::vector<std::uint8_t> out(image.samples.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned v = image.max_value == 255
                           ? image.samples[i]
                           : static_cast<unsigned>((image.samples[i] * 255u + image.max_value / 2) / image.max_value);
    out[i] = static_cast<std::uint8_t>(std::min(v, 255u));
  }
  return out;
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open image " + quoted(path));
  unsigned char magic[4] = {0, 0, 0, 0};
  probe.read(reinterpret_cast<char*>(magic), 4);
  probe.close();
  if (magic[0] == 'P' && magic[1] >= '2' && magic[1] <= '6' && magic[1] != '4') return read_pnm(path);
  if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') return read_png(path);
  if (magic[0] == 0xFF && magic[1] == 0xD8) return read_jpeg(path);
  throw IoError("unrecognized image format in " + quoted(path));
}

void write_image(const std::filesystem::path& path, const RasterImage& image) {
  const std::string ext = lower_extension(path);
  const auto bytes = to_bytes(image);
  if (ext == ".pgm" || ext == ".ppm") {
    if ((ext == ".pgm") != (image.channels == 1))
      throw IoError("channel count does not match extension for " + quoted(path));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + quoted(path));
    out << (image.channels == 1 ? "P5" : "P6") << '\n' << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + quoted(path));
    return;
  }
  if (ext == ".png") {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr))
      throw IoError("cannot write PNG " + quoted(path) + ": " + png.message);
    return;
  }
  throw IoError("unsupported output format for " + quoted(path) + " (use .pgm, .ppm or .png)");
}

}  // namespace igdts
