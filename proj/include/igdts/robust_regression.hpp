#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "igdts/slope_threshold.hpp"

namespace igdts {

// y = X beta + omega + gamma with dense Gaussian omega and sparse gamma.
struct RegressionProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  LambdaSequence lambda;
  std::optional<double> eta;  // gradient step; nullopt selects default_step_size(X)
  double eps = 1e-8;
  int max_iter = 500;

  // Throws DimensionError/DomainError when the fields do not compose.
  void validate() const;
};

enum class StopReason { kMseIncrease, kTolerance, kMaxIter };

// Output of igdts_fit. Traces are indexed by iterate: entry j describes
// (beta^j, gamma^j), with entry 0 the OLS start and gamma^0 = 0. When the
// run stops on an MSE increase the final trace entry is the rejected
// iterate and the returned pair is the one before it.
struct IgdtsSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  std::vector<double> mse_trace;
  std::vector<double> objective_trace;
  int iterations = 0;          // gradient/threshold sweeps performed
  int returned_iterate = 0;    // index into the traces of (beta, gamma)
  bool converged = false;
  StopReason stop = StopReason::kMaxIter;
  double step_size = 0.0;
  double objective = 0.0;      // objective at the returned pair
};

struct LadResult {
  Eigen::VectorXd beta;
  double l1_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// argmin 0.5 ||y - X beta||^2; minimum-norm solution when X is rank deficient.
Eigen::VectorXd ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Approximate argmin ||y - X beta||_1 by IRLS with weights 1/max(|r_i|, smoothing).
// Returns the best iterate seen.
LadResult lad_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double smoothing = 1e-6,
                  int max_iter = 200);

IgdtsSolution igdts_fit(const RegressionProblem& problem);

// 0.5 ||y - X beta - gamma||^2 + sum_i lambda_i |gamma|_(i)
double objective_value(const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y, const LambdaSequence& lambda);

// 1 / L with L the largest eigenvalue of X^T X, by power iteration.
double default_step_size(const Eigen::MatrixXd& X);

double d_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);
// Half the l1 residual at the LAD fit.
double d_lad(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);
double d_lss(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double lambda, double eps = 1e-8,
             int max_iter = 500);
double d_igdts(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const LambdaSequence& lambda,
               double eps = 1e-8, int max_iter = 500);

}  // namespace igdts
