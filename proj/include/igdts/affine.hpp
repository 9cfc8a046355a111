#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "igdts/box.hpp"

namespace igdts {

// Six-parameter affine warp of the reference template, a rectangle of the
// template size centred on the origin. A template point u maps to
//
//   x = (tx, ty) + R(theta) * [[1, skew], [0, 1]] * diag(scale, scale * aspect) * u
//
// so the identity state maps a template onto itself about the origin.
struct AffineState {
  double tx = 0.0;
  double ty = 0.0;
  double theta = 0.0;
  double scale = 1.0;
  double aspect = 1.0;
  double skew = 0.0;

  static constexpr std::size_t kParams = 6;

  // Throws DomainError unless all finite and scale, aspect > 0.
  void validate() const;
  bool valid() const noexcept;

  Eigen::Matrix2d linear() const;
  Eigen::Vector2d translation() const { return {tx, ty}; }
  Eigen::Vector2d apply(const Eigen::Vector2d& u) const { return translation() + linear() * u; }

  // Decomposes A = R * K * D with positive diagonal (QR with R(theta) orthogonal).
  static AffineState from_matrix(const Eigen::Matrix2d& A, const Eigen::Vector2d& t);
  // State of the inverse map x -> u.
  AffineState inverse() const;

  std::array<double, kParams> as_array() const { return {tx, ty, theta, scale, aspect, skew}; }
  static AffineState from_array(const std::array<double, kParams>& p) {
    return {p[0], p[1], p[2], p[3], p[4], p[5]};
  }

  friend bool operator==(const AffineState&, const AffineState&) = default;
};

// Axis-aligned bounding box of the warped template corners.
Box affine_to_bbox(const AffineState& state, double template_w, double template_h);

// State whose warped template_w x template_h template is exactly `box`.
AffineState state_from_box(const Box& box, double template_w, double template_h);

}  // namespace igdts
