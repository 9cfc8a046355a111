#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace igdts {

// Decoded raster with interleaved samples (1 = gray, 3 = RGB).
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  int max_value = 255;
  std::vector<std::uint16_t> samples;
};

// PGM/PPM (P2, P3, P5, P6), PNG and JPEG, detected from the file header.
// Alpha channels are dropped. Throws IoError naming the file.
RasterImage read_image(const std::filesystem::path& path);

// Format chosen by extension: .pgm, .ppm or .png. 8-bit output only.
void write_image(const std::filesystem::path& path, const RasterImage& image);

}  // namespace igdts
