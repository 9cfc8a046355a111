#include "igdts/slope_threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "igdts/errors.hpp"

namespace igdts {

LambdaSequence::LambdaSequence(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw DomainError("LambdaSequence: entry " + std::to_string(i) + " is negative or non-finite");
    if (i > 0 && values_[i] > values_[i - 1])
      throw DomainError("LambdaSequence: entries must be non-increasing (violated at index " +
                        std::to_string(i) + ")");
  }
}

LambdaSequence LambdaSequence::linear(std::size_t n, double lambda_max, double lambda_min) {
  if (lambda_min > lambda_max) throw DomainError("LambdaSequence::linear: lambda_min exceeds lambda_max");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lambda_max;
  } else {
    const double step = (lambda_max - lambda_min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = lambda_max - static_cast<double>(i) * step;
    v.back() = lambda_min;
    // Rounding in the product can leave a last-place bump; clamp it away.
    for (std::size_t i = 1; i < n; ++i) v[i] = std::max(0.0, std::min(v[i], v[i - 1]));
  }
  return LambdaSequence(std::move(v));
}

LambdaSequence LambdaSequence::constant(std::size_t n, double value) {
  return LambdaSequence(std::vector<double>(n, value));
}

double soft_threshold(double x, double lambda) {
  const double mag = std::abs(x) - lambda;
  if (mag <= 0.0) return 0.0;
  return std::copysign(mag, x);
}

ThresholdRule::ThresholdRule(std::string name, Kernel kernel, Inverse analytic_inverse)
    : name_(std::move(name)), kernel_(std::move(kernel)), inverse_(std::move(analytic_inverse)) {}

namespace {

double soft_inverse(double u, double lambda) { return u + lambda; }

}  // namespace

ThresholdRule ThresholdRule::soft() { return ThresholdRule("soft", soft_threshold, soft_inverse); }

ThresholdRule ThresholdRule::sorted_soft() {
  return ThresholdRule("sorted-soft", soft_threshold, soft_inverse);
}

double sorted_l1_norm(std::span<const double> x, const LambdaSequence& lambda) {
  if (x.size() != lambda.size())
    throw DimensionError("sorted_l1_norm: vector has " + std::to_string(x.size()) +
                         " entries, lambda has " + std::to_string(lambda.size()));
  std::vector<double> mag(x.size());
  std::transform(x.begin(), x.end(), mag.begin(), [](double v) { return std::abs(v); });
  std::sort(mag.begin(), mag.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t j = 0; j < mag.size(); ++j) sum += lambda[j] * mag[j];
  return sum;
}

double sorted_l1_norm(const Eigen::VectorXd& x, const LambdaSequence& lambda) {
  return sorted_l1_norm(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), lambda);
}

Eigen::VectorXd sorted_soft_threshold(const Eigen::VectorXd& x, const LambdaSequence& lambda) {
  SortedSoftThresholder op(lambda);
  Eigen::VectorXd out;
  op.apply(x, out);
  return out;
}

SortedSoftThresholder::SortedSoftThresholder(const LambdaSequence& lambda) : lambda_(lambda) {}

namespace {

// Descending key, ascending index on ties.
inline bool ranks_before(const std::pair<double, int>& a, const std::pair<double, int>& b) {
  return a.first > b.first || (a.first == b.first && a.second < b.second);
}

}  // namespace

bool SortedSoftThresholder::repair_order() {
  auto& v = ranked_;
  const std::size_t n = v.size();
  const std::size_t budget = 8 * n;
  std::size_t moves = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!ranks_before(v[i], v[i - 1])) continue;
    const auto key = v[i];
    std::size_t j = i;
    while (j > 0 && ranks_before(key, v[j - 1])) {
      v[j] = v[j - 1];
      --j;
      if (++moves > budget) {
        v[j] = key;
        return false;
      }
    }
    v[j] = key;
  }
  return true;
}

double SortedSoftThresholder::apply_impl(const Eigen::VectorXd& x, Eigen::VectorXd& out, bool want_penalty) {
  const auto n = static_cast<std::size_t>(x.size());
  if (n != lambda_.size())
    throw DimensionError("sorted_soft_threshold: vector has " + std::to_string(n) + " entries, lambda has " +
                         std::to_string(lambda_.size()));
  // An entry at or below the smallest weight is zeroed at any rank, and every
  // larger entry ranks ahead of it. Keying such entries as 0 keeps their
  // relative order fixed (by index), which keeps the repair pass short.
  const double floor = lambda_.min();
  auto key = [&](int i) {
    const double a = std::abs(x[i]);
    return a > floor ? a : 0.0;
  };
  if (ranked_.size() != n) {
    ranked_.resize(n);
    for (std::size_t i = 0; i < n; ++i) ranked_[i] = {key(static_cast<int>(i)), static_cast<int>(i)};
    std::sort(ranked_.begin(), ranked_.end(), ranks_before);
  } else {
    // Reuse the previous ordering as the starting guess.
    for (auto& e : ranked_) e.first = key(e.second);
    if (!repair_order()) std::sort(ranked_.begin(), ranked_.end(), ranks_before);
  }

  out.setZero(x.size());
  const auto lam = lambda_.values();
  auto& shrunk = shrunk_;
  shrunk.clear();
  bool ordered = true;
  for (std::size_t rank = 0; rank < n && ranked_[rank].first > 0.0; ++rank) {
    const double s = ranked_[rank].first - lam[rank];
    if (s <= 0.0) continue;
    const int idx = ranked_[rank].second;
    out[idx] = std::copysign(s, x[idx]);
    if (want_penalty) {
      if (!shrunk.empty() && shrunk.back() < s) ordered = false;
      shrunk.push_back(s);
    }
  }
  if (!want_penalty) return 0.0;
  // Shrunk magnitudes in rank order are usually sorted already; insertion
  // sort fixes the occasional local inversion.
  if (!ordered) {
    for (std::size_t i = 1; i < shrunk.size(); ++i) {
      const double v = shrunk[i];
      std::size_t j = i;
      while (j > 0 && shrunk[j - 1] < v) {
        shrunk[j] = shrunk[j - 1];
        --j;
      }
      shrunk[j] = v;
    }
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < shrunk.size(); ++j) penalty += lam[j] * shrunk[j];
  return penalty;
}

void SortedSoftThresholder::apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) { apply_impl(x, out, false); }

double SortedSoftThresholder::apply_with_penalty(const Eigen::VectorXd& x, Eigen::VectorXd& out) {
  return apply_impl(x, out, true);
}

double threshold_inverse_numeric(const ThresholdRule& rule, double u, double lambda) {
  if (!(u >= 0.0)) throw DomainError("threshold_inverse: u must be non-negative");
  double lo = u;
  if (rule(lo, lambda) > u)
    throw NumericError("threshold_inverse: rule '" + std::string(rule.name()) +
                       "' exceeds the identity at u, no valid bracket");
  double step = std::max({1.0, std::abs(u), std::abs(lambda)});
  double hi = u + step;
  int expansions = 0;
  while (rule(hi, lambda) <= u) {
    lo = hi;
    step *= 2.0;
    hi = u + step;
    if (++expansions > 200 || !std::isfinite(hi))
      throw NumericError("threshold_inverse: rule '" + std::string(rule.name()) +
                         "' never exceeds u, supremum is unbounded");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (rule(mid, lambda) <= u)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double threshold_inverse(const ThresholdRule& rule, double u, double lambda) {
  if (!(u >= 0.0)) throw DomainError("threshold_inverse: u must be non-negative");
  if (u > 0.0 && rule.has_analytic_inverse()) return rule.analytic_inverse()(u, lambda);
  return threshold_inverse_numeric(rule, u, lambda);
}

double penalty_from_threshold(const ThresholdRule& rule, double theta, double lambda) {
  const double upper = std::abs(theta);
  if (upper == 0.0) return 0.0;
  const auto gap = [&](double u) { return threshold_inverse(rule, u, lambda) - u; };
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(gap, 0.0, upper, 15, 1e-13, &error);
  return value;
}

}  // namespace igdts
