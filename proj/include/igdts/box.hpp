#pragma once

namespace igdts {

// Axis-aligned rectangle in continuous pixel coordinates: covers
// [x, x + w) x [y, y + h); pixel (c, r) spans [c, c+1) x [r, r+1).
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const noexcept { return x + 0.5 * w; }
  double cy() const noexcept { return y + 0.5 * h; }
  double area() const noexcept { return w * h; }

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace igdts
