#include "igdts/imaging_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "igdts/errors.hpp"

namespace igdts {

Frame::Frame(int width, int height, std::vector<float> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) throw DimensionError("Frame: size must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height)
    throw DimensionError("Frame: pixel count does not match size");
}

Frame::Frame(int width, int height, float fill)
    : Frame(width, height, std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill)) {}

Frame Frame::from_raster(const RasterImage& image) {
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  if (image.samples.size() != n * image.channels) throw DimensionError("Frame::from_raster: bad sample count");
  const double scale = 1.0 / image.max_value;
  std::vector<float> px(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v;
    if (image.channels == 1) {
      v = image.samples[i] * scale;
    } else {
      const auto r = image.samples[3 * i], g = image.samples[3 * i + 1], b = image.samples[3 * i + 2];
      v = (r == g && g == b) ? r * scale : (0.299 * r + 0.587 * g + 0.114 * b) * scale;
    }
    px[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return Frame(image.width, image.height, std::move(px));
}

RasterImage Frame::to_raster() const {
  RasterImage img;
  img.width = width_;
  img.height = height_;
  img.channels = 1;
  img.samples.resize(pixels_.size());
  for (std::size_t i = 0; i < pixels_.size(); ++i)
    img.samples[i] = static_cast<std::uint16_t>(std::lround(std::clamp(pixels_[i], 0.0f, 1.0f) * 255.0f));
  return img;
}

std::vector<Frame> load_sequence(const std::filesystem::path& dir, const std::string& pattern) {
  if (!std::filesystem::is_directory(dir)) throw IoError("sequence directory not found: '" + dir.string() + "'");
  // Turn the printf pattern into a regex capturing the integer field.
  static const std::regex field(R"(%0?(\d*)d)");
  std::smatch m;
  if (!std::regex_search(pattern, m, field)) throw IoError("frame pattern needs one %d field: '" + pattern + "'");
  auto escape = [](const std::string& s) {
    static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
    return std::regex_replace(s, special, R"(\$&)");
  };
  const std::regex name_re(escape(m.prefix().str()) + "(\\d+)" + escape(m.suffix().str()));

  std::map<long, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch nm;
    if (!std::regex_match(name, nm, name_re)) continue;
    const long index = std::stol(nm[1].str());
    if (!files.emplace(index, entry.path()).second)
      throw IoError("duplicate frame index " + std::to_string(index) + " in '" + dir.string() + "'");
  }
  if (files.empty()) throw IoError("no frames matching '" + pattern + "' in '" + dir.string() + "'");

  std::vector<Frame> frames;
  frames.reserve(files.size());
  long expected = files.begin()->first;
  for (const auto& [index, path] : files) {
    if (index != expected) throw IoError("gap in frame indices: missing frame " + std::to_string(expected));
    ++expected;
    try {
      frames.push_back(Frame::from_raster(read_image(path)));
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw IoError("unreadable frame '" + path.string() + "': " + e.what());
    }
    if (frames.size() > 1 && (frames.back().width() != frames.front().width() ||
                              frames.back().height() != frames.front().height()))
      throw IoError("frame '" + path.string() + "' differs in size from the first frame");
  }
  return frames;
}

void warp_patch(const Frame& frame, const AffineState& state, int side, Eigen::VectorXd& out) {
  if (side < 2) throw DomainError("warp_patch: side must be at least 2");
  state.validate();
  const Eigen::Matrix2d A = state.linear();
  const int w = frame.width();
  const int h = frame.height();
  const auto px = frame.pixels();
  out.resize(static_cast<Eigen::Index>(side) * side);
  const double half = 0.5 * side;
  // Pixel centres sit at half-integers, so the sampling index is x - 0.5.
  const double ox = state.tx - 0.5;
  const double oy = state.ty - 0.5;
  for (int r = 0; r < side; ++r) {
    const double v = r + 0.5 - half;
    for (int c = 0; c < side; ++c) {
      const double u = c + 0.5 - half;
      double x = ox + A(0, 0) * u + A(0, 1) * v;
      double y = oy + A(1, 0) * u + A(1, 1) * v;
      x = std::clamp(x, 0.0, w - 1.0);
      y = std::clamp(y, 0.0, h - 1.0);
      const int x0 = std::min(static_cast<int>(x), w - 1);
      const int y0 = std::min(static_cast<int>(y), h - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = x - x0;
      const double fy = y - y0;
      const std::size_t r0 = static_cast<std::size_t>(y0) * w;
      const std::size_t r1 = static_cast<std::size_t>(y1) * w;
      double value = px[r0 + x0];
      if (fx != 0.0 || fy != 0.0) {
        const double top = px[r0 + x0] + fx * (px[r0 + x1] - px[r0 + x0]);
        const double bottom = px[r1 + x0] + fx * (px[r1 + x1] - px[r1 + x0]);
        value = top + fy * (bottom - top);
      }
      out[static_cast<Eigen::Index>(r) * side + c] = std::clamp(value, 0.0, 1.0);
    }
  }
}

Eigen::VectorXd warp_patch(const Frame& frame, const AffineState& state, int side) {
  Eigen::VectorXd out;
  warp_patch(frame, state, side, out);
  return out;
}

bool warp_outside_frame(const Frame& frame, const AffineState& state, int side) {
  const Box b = affine_to_bbox(state, side, side);
  return b.x + b.w <= 0.0 || b.y + b.h <= 0.0 || b.x >= frame.width() || b.y >= frame.height();
}

namespace {

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

GroundTruth parse_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth '" + path.string() + "'");
  GroundTruth gt;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      // Only a trailing blank line is tolerated.
      if (in.peek() == EOF) break;
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": empty line");
    }
    std::vector<double> values;
    std::size_t start = 0;
    bool ok = true;
    while (ok) {
      const std::size_t end = line.find_first_of(",\t", start);
      double v;
      ok = parse_double(std::string_view(line).substr(start, end == std::string::npos ? std::string::npos : end - start), v);
      if (ok) values.push_back(v);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (!ok || (values.size() != 4 && values.size() != 8))
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 4 or 8 numbers");
    Box box;
    if (values.size() == 4) {
      box = {values[0], values[1], values[2], values[3]};
    } else {
      double x0 = values[0], x1 = values[0], y0 = values[1], y1 = values[1];
      for (int i = 1; i < 4; ++i) {
        x0 = std::min(x0, values[2 * i]);
        x1 = std::max(x1, values[2 * i]);
        y0 = std::min(y0, values[2 * i + 1]);
        y1 = std::max(y1, values[2 * i + 1]);
      }
      box = {x0, y0, x1 - x0, y1 - y0};
    }
    if (!(box.w > 0.0 && box.h > 0.0))
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": box must have positive width and height");
    gt.boxes.push_back(box);
  }
  return gt;
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const Box& b : gt.boxes)
    out << format_number(b.x) << ',' << format_number(b.y) << ',' << format_number(b.w) << ','
        << format_number(b.h) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_overlay(const Frame& frame, std::span<const ColoredBox> boxes, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  const bool gray = ext == ".pgm";
  const RasterImage base = frame.to_raster();
  RasterImage img = base;
  if (!gray) {
    img.channels = 3;
    img.samples.resize(base.samples.size() * 3);
    for (std::size_t i = 0; i < base.samples.size(); ++i)
      img.samples[3 * i] = img.samples[3 * i + 1] = img.samples[3 * i + 2] = base.samples[i];
  }
  const int w = img.width, h = img.height;
  for (const ColoredBox& cb : boxes) {
    const long x0 = std::lround(cb.box.x), y0 = std::lround(cb.box.y);
    const long x1 = x0 + std::lround(cb.box.w) - 1, y1 = y0 + std::lround(cb.box.h) - 1;
    if (x1 < x0 || y1 < y0) continue;
    const auto luma = static_cast<std::uint16_t>(
        std::lround(0.299 * cb.color[0] + 0.587 * cb.color[1] + 0.114 * cb.color[2]));
    auto paint = [&](long x, long y) {
      if (x < 0 || y < 0 || x >= w || y >= h) return;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (gray) {
        img.samples[i] = luma;
      } else {
        for (int c = 0; c < 3; ++c) img.samples[3 * i + c] = cb.color[c];
      }
    };
    for (long x = x0; x <= x1; ++x) {
      paint(x, y0);
      paint(x, y1);
    }
    for (long y = y0 + 1; y < y1; ++y) {
      paint(x0, y);
      paint(x1, y);
    }
  }
  write_image(path, img);
}

}  // namespace igdts
