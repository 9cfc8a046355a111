#include "igdts/affine.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "igdts/errors.hpp"

namespace igdts {

bool AffineState::valid() const noexcept {
  for (double v : as_array())
    if (!std::isfinite(v)) return false;
  return scale > 0.0 && aspect > 0.0;
}

void AffineState::validate() const {
  if (!valid()) throw DomainError("AffineState: parameters must be finite with scale > 0 and aspect > 0");
}

Eigen::Matrix2d AffineState::linear() const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  Eigen::Matrix2d shape;
  shape << scale, skew * scale * aspect, 0.0, scale * aspect;
  return rot * shape;
}

AffineState AffineState::from_matrix(const Eigen::Matrix2d& A, const Eigen::Vector2d& t) {
  // Gram-Schmidt on the columns: A = [q1 q2] * [[a, b], [0, c]].
  const Eigen::Vector2d col0 = A.col(0);
  const double a = col0.norm();
  if (!(a > 0.0)) throw DomainError("AffineState::from_matrix: degenerate first column");
  const Eigen::Vector2d q1 = col0 / a;
  const double b = q1.dot(A.col(1));
  const Eigen::Vector2d q2(-q1.y(), q1.x());
  const double c = q2.dot(A.col(1));
  if (!(c > 0.0)) throw DomainError("AffineState::from_matrix: map is not orientation preserving");
  AffineState s;
  s.tx = t.x();
  s.ty = t.y();
  s.theta = std::atan2(q1.y(), q1.x());
  s.scale = a;
  s.aspect = c / a;
  s.skew = b / c;
  return s;
}

AffineState AffineState::inverse() const {
  const Eigen::Matrix2d inv = linear().inverse();
  return from_matrix(inv, -inv * translation());
}

Box affine_to_bbox(const AffineState& state, double template_w, double template_h) {
  const double hw = 0.5 * template_w;
  const double hh = 0.5 * template_h;
  const Eigen::Vector2d corners[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& c : corners) {
    const Eigen::Vector2d p = state.apply(c);
    x0 = std::min(x0, p.x());
    y0 = std::min(y0, p.y());
    x1 = std::max(x1, p.x());
    y1 = std::max(y1, p.y());
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

AffineState state_from_box(const Box& box, double template_w, double template_h) {
  if (!(box.w > 0.0 && box.h > 0.0)) throw DomainError("state_from_box: box must have positive size");
  AffineState s;
  s.tx = box.cx();
  s.ty = box.cy();
  s.scale = box.w / template_w;
  s.aspect = (box.h / template_h) / s.scale;
  return s;
}

}  // namespace igdts
