#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace igdts {

// Regularization weights lambda_1 >= lambda_2 >= ... >= lambda_n >= 0.
class LambdaSequence {
 public:
  LambdaSequence() = default;
  explicit LambdaSequence(std::vector<double> values);

  // lambda_i = lambda_max - (i-1)(lambda_max - lambda_min)/(n-1).
  static LambdaSequence linear(std::size_t n, double lambda_max, double lambda_min);
  static LambdaSequence constant(std::size_t n, double value);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double max() const { return values_.empty() ? 0.0 : values_.front(); }
  double min() const { return values_.empty() ? 0.0 : values_.back(); }

 private:
  std::vector<double> values_;
};

// Scalar threshold rule Theta(x; lambda). The two built-in members are the
// soft rule and the sorted-soft rule; the latter is the same scalar kernel,
// applied to the i-th largest magnitude with the i-th weight by
// sorted_soft_threshold(). Custom rules may be wrapped for verification
// against the threshold axioms.
class ThresholdRule {
 public:
  using Kernel = std::function<double(double x, double lambda)>;
  using Inverse = std::function<double(double u, double lambda)>;

  ThresholdRule(std::string name, Kernel kernel, Inverse analytic_inverse = {});

  static ThresholdRule soft();
  static ThresholdRule sorted_soft();

  double operator()(double x, double lambda) const { return kernel_(x, lambda); }
  std::string_view name() const noexcept { return name_; }
  bool has_analytic_inverse() const noexcept { return static_cast<bool>(inverse_); }
  const Inverse& analytic_inverse() const noexcept { return inverse_; }

 private:
  std::string name_;
  Kernel kernel_;
  Inverse inverse_;
};

double soft_threshold(double x, double lambda);

// sum_j lambda_j |x|_(j) with |x|_(1) >= ... >= |x|_(n).
double sorted_l1_norm(std::span<const double> x, const LambdaSequence& lambda);
double sorted_l1_norm(const Eigen::VectorXd& x, const LambdaSequence& lambda);

// Pairs the i-th largest |x| (ties: lower index first) with lambda_i and
// soft-thresholds it; results are returned in the original positions.
Eigen::VectorXd sorted_soft_threshold(const Eigen::VectorXd& x, const LambdaSequence& lambda);

// Reusable sorted-soft-threshold evaluator for inner loops. It keeps the
// magnitude ordering from the previous call and repairs it with an
// insertion pass, which is exact for any input and near linear when
// successive inputs differ little.
class SortedSoftThresholder {
 public:
  explicit SortedSoftThresholder(const LambdaSequence& lambda);

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out);
  // Same, returning the sorted-l1 norm of `out`.
  double apply_with_penalty(const Eigen::VectorXd& x, Eigen::VectorXd& out);
  const LambdaSequence& lambda() const noexcept { return lambda_; }

 private:
  double apply_impl(const Eigen::VectorXd& x, Eigen::VectorXd& out, bool want_penalty);
  bool repair_order();

  LambdaSequence lambda_;
  std::vector<std::pair<double, int>> ranked_;  // (key, index) in rank order
  std::vector<double> shrunk_;
};

// sup{t : Theta(t; lambda) <= u}. Uses the rule's analytic inverse for
// u > 0 when present, bisection otherwise.
double threshold_inverse(const ThresholdRule& rule, double u, double lambda);

// Bisection-only variant, exposed for checking analytic inverses.
double threshold_inverse_numeric(const ThresholdRule& rule, double u, double lambda);

// P(theta; lambda) = integral_0^|theta| (Theta^-1(u; lambda) - u) du by
// adaptive Gauss-Kronrod quadrature.
double penalty_from_threshold(const ThresholdRule& rule, double theta, double lambda);

}  // namespace igdts
