#include "igdts/robust_regression.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "igdts/errors.hpp"

namespace igdts {

namespace {

void check_xy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* where) {
  if (X.rows() < 1 || X.cols() < 1) throw DimensionError(std::string(where) + ": design matrix is empty");
  if (X.rows() != y.size())
    throw DimensionError(std::string(where) + ": X has " + std::to_string(X.rows()) + " rows but y has " +
                         std::to_string(y.size()) + " entries");
}

}  // namespace

void RegressionProblem::validate() const {
  check_xy(X, y, "RegressionProblem");
  if (static_cast<Eigen::Index>(lambda.size()) != y.size())
    throw DimensionError("RegressionProblem: lambda has " + std::to_string(lambda.size()) + " entries, expected " +
                         std::to_string(y.size()));
  if (eta && !(*eta > 0.0 && std::isfinite(*eta))) throw DomainError("RegressionProblem: eta must be positive");
  if (!(eps > 0.0)) throw DomainError("RegressionProblem: eps must be positive");
  if (max_iter < 1) throw DomainError("RegressionProblem: max_iter must be at least 1");
}

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_xy(X, y, "ols_fit");
  return X.completeOrthogonalDecomposition().solve(y);
}

LadResult lad_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double smoothing, int max_iter) {
  check_xy(X, y, "lad_fit");
  if (!(smoothing > 0.0)) throw DomainError("lad_fit: smoothing must be positive");

  LadResult best;
  best.beta = ols_fit(X, y);
  best.l1_residual = (y - X * best.beta).lpNorm<1>();

  Eigen::VectorXd beta = best.beta;
  double previous = best.l1_residual;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd r = y - X * beta;
    const Eigen::VectorXd sqrt_w = r.cwiseAbs().cwiseMax(smoothing).cwiseInverse().cwiseSqrt();
    const Eigen::MatrixXd Xw = sqrt_w.asDiagonal() * X;
    const Eigen::VectorXd yw = sqrt_w.cwiseProduct(y);
    beta = Xw.completeOrthogonalDecomposition().solve(yw);
    const double objective = (y - X * beta).lpNorm<1>();
    best.iterations = it;
    if (objective < best.l1_residual) {
      best.l1_residual = objective;
      best.beta = beta;
    }
    if (std::abs(previous - objective) <= 1e-12 * std::max(1.0, objective)) {
      best.converged = true;
      break;
    }
    previous = objective;
  }
  return best;
}

double objective_value(const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y, const LambdaSequence& lambda) {
  check_xy(X, y, "objective_value");
  if (beta.size() != X.cols() || gamma.size() != y.size())
    throw DimensionError("objective_value: beta/gamma sizes do not match X");
  return 0.5 * (y - X * beta - gamma).squaredNorm() + sorted_l1_norm(gamma, lambda);
}

double default_step_size(const Eigen::MatrixXd& X) {
  if (X.size() == 0) throw DimensionError("default_step_size: empty design matrix");
  if (X.cwiseAbs().maxCoeff() == 0.0) throw DomainError("default_step_size: design matrix is all zero");

  const Eigen::Index p = X.cols();
  // Deterministic start with components in every direction.
  Eigen::VectorXd v(p);
  for (Eigen::Index i = 0; i < p; ++i) v[i] = 1.0 + 0.25 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();

  double estimate = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = X.transpose() * (X * v);
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) {
      // v fell into the null space; restart along a coordinate axis.
      v.setZero();
      v[it % p] = 1.0;
      continue;
    }
    v = w / norm;
    if (it > 0 && std::abs(rayleigh - estimate) <= 1e-6 * rayleigh) {
      estimate = rayleigh;
      break;
    }
    estimate = rayleigh;
  }
  // One more multiply for the Rayleigh quotient at the final vector.
  estimate = std::max(estimate, v.dot(X.transpose() * (X * v)));
  return 1.0 / estimate;
}

IgdtsSolution igdts_fit(const RegressionProblem& problem) {
  problem.validate();
  const auto& X = problem.X;
  const auto& y = problem.y;
  const double n = static_cast<double>(y.size());

  IgdtsSolution sol;
  sol.step_size = problem.eta ? *problem.eta : default_step_size(X);
  const double eta = sol.step_size;

  SortedSoftThresholder threshold(problem.lambda);

  Eigen::VectorXd beta = ols_fit(X, y);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(y.size());
  double mse = std::numeric_limits<double>::infinity();

  sol.mse_trace.push_back((y - X * beta).squaredNorm() / n);
  sol.objective_trace.push_back(objective_value(beta, gamma, X, y, problem.lambda));

  Eigen::VectorXd next_beta(beta.size());
  Eigen::VectorXd next_gamma(y.size());
  Eigen::VectorXd residual(y.size());
  for (int j = 0; j < problem.max_iter; ++j) {
    // beta step on 0.5||(y - gamma) - X beta||^2
    next_beta = beta - eta * (X.transpose() * (X * beta - (y - gamma)));
    residual = y - X * next_beta;
    threshold.apply(residual, next_gamma);
    const double next_mse = (residual - next_gamma).squaredNorm() / n;

    sol.iterations = j + 1;
    if (!std::isfinite(next_mse) || !next_beta.allFinite())
      throw NumericError("igdts_fit: non-finite values at iteration " + std::to_string(j + 1));
    sol.mse_trace.push_back(next_mse);
    sol.objective_trace.push_back(0.5 * (residual - next_gamma).squaredNorm() +
                                  sorted_l1_norm(next_gamma, problem.lambda));

    if (next_mse > mse) {
      sol.stop = StopReason::kMseIncrease;
      sol.converged = true;
      break;
    }
    const bool settled = std::abs(next_mse - mse) < problem.eps;
    beta = next_beta;
    gamma = next_gamma;
    mse = next_mse;
    if (settled) {
      sol.stop = StopReason::kTolerance;
      sol.converged = true;
      break;
    }
  }

  sol.beta = std::move(beta);
  sol.gamma = std::move(gamma);
  sol.returned_iterate = sol.stop == StopReason::kMseIncrease ? sol.iterations - 1 : sol.iterations;
  sol.objective = sol.objective_trace[static_cast<std::size_t>(sol.returned_iterate)];
  return sol;
}

double d_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  return 0.5 * (y - X * ols_fit(X, y)).squaredNorm();
}

double d_lad(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) { return 0.5 * lad_fit(X, y).l1_residual; }

double d_lss(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double lambda, double eps, int max_iter) {
  return d_igdts(y, X, LambdaSequence::constant(static_cast<std::size_t>(y.size()), lambda), eps, max_iter);
}

double d_igdts(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const LambdaSequence& lambda, double eps,
               int max_iter) {
  RegressionProblem problem{X, y, lambda, std::nullopt, eps, max_iter};
  return igdts_fit(problem).objective;
}

}  // namespace igdts
