#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "igdts/affine.hpp"
#include "igdts/box.hpp"
#include "igdts/image_codec.hpp"

namespace igdts {

// Grayscale frame with intensities in [0, 1], row-major.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, std::vector<float> pixels);
  Frame(int width, int height, float fill = 0.0f);

  static Frame from_raster(const RasterImage& image);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  float at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  float& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const float> pixels() const noexcept { return pixels_; }

  // Rounds to 8-bit gray.
  RasterImage to_raster() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> pixels_;
};

struct GroundTruth {
  std::vector<Box> boxes;  // boxes[i] belongs to frame i + 1
};

// Frames whose names match a printf-style pattern with one integer field
// ("%04d.pgm", "img%05d.png"), sorted by index. Gaps in the index run are an error.
std::vector<Frame> load_sequence(const std::filesystem::path& dir, const std::string& pattern);

// Inverse-warps the side x side reference template through `state` and samples
// the frame bilinearly (border clamped). Row-major, length side^2.
Eigen::VectorXd warp_patch(const Frame& frame, const AffineState& state, int side);
void warp_patch(const Frame& frame, const AffineState& state, int side, Eigen::VectorXd& out);

// True when the warped template does not overlap the frame at all.
bool warp_outside_frame(const Frame& frame, const AffineState& state, int side);

// One box per line, "x,y,w,h" or an 8-number polygon reduced to its bounding
// box; ',' or TAB delimited. Throws IoError with the 1-based line number.
GroundTruth parse_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);

struct ColoredBox {
  Box box;
  std::array<std::uint8_t, 3> color{255, 0, 0};
};

// Frame with 1-px rectangle outlines, clipped to the image. .ppm/.png are
// written in color, .pgm with the outline luma.
void write_overlay(const Frame& frame, std::span<const ColoredBox> boxes, const std::filesystem::path& path);

// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

}  // namespace igdts
