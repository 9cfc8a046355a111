#include "igdts/subspace_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "igdts/errors.hpp"

namespace igdts {

OrthonormalBasis::OrthonormalBasis(Eigen::MatrixXd U, double tolerance) : U_(std::move(U)) {
  if (U_.cols() > U_.rows())
    throw DomainError("OrthonormalBasis: " + std::to_string(U_.cols()) + " columns exceed dimension " +
                      std::to_string(U_.rows()));
  if (U_.cols() == 0) return;
  const Eigen::MatrixXd gram = U_.transpose() * U_;
  const double deviation = (gram - Eigen::MatrixXd::Identity(U_.cols(), U_.cols())).cwiseAbs().maxCoeff();
  if (!(deviation <= tolerance))
    throw DomainError("OrthonormalBasis: columns are not orthonormal (max |U^T U - I| = " +
                      std::to_string(deviation) + ")");
}

SubspaceModel::SubspaceModel(int max_basis) : max_basis_(max_basis) {
  if (max_basis < 1) throw DomainError("SubspaceModel: max_basis must be at least 1");
}

SubspaceModel::SubspaceModel(Eigen::VectorXd mu, OrthonormalBasis basis, Eigen::VectorXd sigma, double n_eff,
                             int max_basis)
    : mu_(std::move(mu)), basis_(std::move(basis)), sigma_(std::move(sigma)), n_eff_(n_eff), max_basis_(max_basis) {
  if (max_basis < 1) throw DomainError("SubspaceModel: max_basis must be at least 1");
  if (basis_.size() > 0 && basis_.dim() != mu_.size())
    throw DimensionError("SubspaceModel: basis dimension does not match the mean");
  if (sigma_.size() != basis_.size()) throw DimensionError("SubspaceModel: one singular value per basis vector");
  if (basis_.size() > max_basis) throw DimensionError("SubspaceModel: basis larger than max_basis");
  for (Eigen::Index i = 0; i < sigma_.size(); ++i) {
    if (!(sigma_[i] >= 0.0) || (i > 0 && sigma_[i] > sigma_[i - 1]))
      throw DomainError("SubspaceModel: singular values must be non-negative and non-increasing");
  }
  if (!(n_eff >= 0.0)) throw DomainError("SubspaceModel: n_eff must be non-negative");
}

SubspaceSolver::SubspaceSolver(LambdaSequence lambda, double eps, int max_iter)
    : threshold_(lambda), eps_(eps), max_iter_(max_iter) {
  if (!(eps > 0.0)) throw DomainError("SubspaceSolver: eps must be positive");
  if (max_iter < 1) throw DomainError("SubspaceSolver: max_iter must be at least 1");
}

double SubspaceSolver::run(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis, std::vector<double>* trace,
                           int* iterations) {
  const Eigen::Index d = y_bar.size();
  const auto& U = basis.matrix();
  if (basis.size() > 0 && U.rows() != d)
    throw DimensionError("igdts_subspace_solve: observation has " + std::to_string(d) +
                         " entries, basis dimension is " + std::to_string(U.rows()));
  if (static_cast<Eigen::Index>(threshold_.lambda().size()) != d)
    throw DimensionError("igdts_subspace_solve: lambda has " + std::to_string(threshold_.lambda().size()) +
                         " entries, expected " + std::to_string(d));

  gamma_.setZero(d);
  double previous = std::numeric_limits<double>::infinity();
  double objective = 0.0;
  int it = 0;
  while (it < max_iter_) {
    ++it;
    if (basis.size() > 0) {
      work_.noalias() = y_bar - gamma_;
      z_.noalias() = U.transpose() * work_;
      residual_ = y_bar;
      residual_.noalias() -= U * z_;
    } else {
      z_.resize(0);
      residual_ = y_bar;
    }
    const double penalty = threshold_.apply_with_penalty(residual_, gamma_);

    objective = 0.5 * (residual_ - gamma_).squaredNorm() + penalty;
    if (!std::isfinite(objective))
      throw NumericError("igdts_subspace_solve: non-finite objective at iteration " + std::to_string(it));
    if (trace) trace->push_back(objective);
    if (std::abs(objective - previous) < eps_) break;
    previous = objective;
  }
  if (iterations) *iterations = it;
  return objective;
}

IgdtsSubspaceSolution SubspaceSolver::solve(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis,
                                            bool keep_trace) {
  IgdtsSubspaceSolution sol;
  sol.distance = run(y_bar, basis, keep_trace ? &sol.objective_trace : nullptr, &sol.iterations);
  sol.z = z_;
  sol.gamma = gamma_;
  return sol;
}

double SubspaceSolver::distance(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis) {
  return run(y_bar, basis, nullptr, nullptr);
}

IgdtsSubspaceSolution igdts_subspace_solve(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis,
                                           const LambdaSequence& lambda, double eps, int max_iter) {
  SubspaceSolver solver(lambda, eps, max_iter);
  return solver.solve(y_bar, basis);
}

IgdtsSubspaceSolution igdts_subspace_solve(const Eigen::VectorXd& y_bar, const Eigen::MatrixXd& U,
                                           const LambdaSequence& lambda, double eps, int max_iter) {
  return igdts_subspace_solve(y_bar, OrthonormalBasis(U), lambda, eps, max_iter);
}

double subspace_distance(const Eigen::VectorXd& y, const SubspaceModel& model, const LambdaSequence& lambda,
                         double eps, int max_iter) {
  if (model.empty()) throw DomainError("subspace_distance: model has no mean yet");
  if (y.size() != model.dim())
    throw DimensionError("subspace_distance: observation has " + std::to_string(y.size()) +
                         " entries, model dimension is " + std::to_string(model.dim()));
  SubspaceSolver solver(lambda, eps, max_iter);
  return solver.distance(y - model.mu(), model.basis());
}

double observation_log_likelihood(const Eigen::VectorXd& y, const SubspaceModel& model,
                                  const LambdaSequence& lambda, double kappa, double eps, int max_iter) {
  if (!(kappa > 0.0)) throw DomainError("observation_likelihood: kappa must be positive");
  return -kappa * subspace_distance(y, model, lambda, eps, max_iter);
}

double observation_likelihood(const Eigen::VectorXd& y, const SubspaceModel& model, const LambdaSequence& lambda,
                              double kappa, double eps, int max_iter) {
  return std::exp(observation_log_likelihood(y, model, lambda, kappa, eps, max_iter));
}

Eigen::VectorXd clean_observation(const Eigen::VectorXd& y_o, const Eigen::VectorXd& gamma_o,
                                  const Eigen::VectorXd& mu) {
  if (y_o.size() != gamma_o.size() || y_o.size() != mu.size())
    throw DimensionError("clean_observation: y, gamma and mu must have equal lengths");
  return (gamma_o.array() != 0.0).select(mu, y_o);
}

namespace {

// Relative cutoff below which a singular direction is treated as numerical noise.
constexpr double kRankCutoff = 1e-10;

// Orthonormalize the columns of U in place (Householder QR) keeping each
// column's orientation.
void reorthonormalize(Eigen::MatrixXd& U) {
  if (U.cols() == 0) return;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(U);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(U.rows(), U.cols());
  const Eigen::MatrixXd R = qr.matrixQR().topRows(U.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < U.cols(); ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  U = std::move(Q);
}

}  // namespace

SubspaceModel incremental_update(const SubspaceModel& model, const Eigen::MatrixXd& batch, double forgetting) {
  if (batch.cols() == 0) return model;
  if (!(forgetting > 0.0 && forgetting <= 1.0)) throw DomainError("incremental_update: forgetting must be in (0, 1]");
  if (!model.empty() && batch.rows() != model.dim())
    throw DimensionError("incremental_update: batch rows do not match model dimension");

  const Eigen::Index d = batch.rows();
  const Eigen::Index m = batch.cols();
  const Eigen::VectorXd batch_mean = batch.rowwise().mean();

  const bool has_prior = !model.empty() && model.n_eff() > 0.0;
  const double prior_n = has_prior ? forgetting * model.n_eff() : 0.0;

  Eigen::VectorXd mu;
  Eigen::MatrixXd data(d, has_prior ? m + 1 : m);
  data.leftCols(m) = batch.colwise() - batch_mean;
  if (has_prior) {
    const double md = static_cast<double>(m);
    data.col(m) = std::sqrt(md * prior_n / (md + prior_n)) * (batch_mean - model.mu());
    mu = (prior_n * model.mu() + md * batch_mean) / (prior_n + md);
  } else {
    mu = batch_mean;
  }

  const Eigen::MatrixXd& U0 = has_prior ? model.basis().matrix() : Eigen::MatrixXd(d, 0);
  const Eigen::Index k0 = has_prior ? model.basis().size() : 0;

  // Split the new data into its projection on the prior basis and an
  // orthogonal residual (projected twice for numerical orthogonality).
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(k0, data.cols());
  Eigen::MatrixXd residual = data;
  if (k0 > 0) {
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::MatrixXd p = U0.transpose() * residual;
      residual -= U0 * p;
      proj += p;
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXd> res_svd(residual, Eigen::ComputeThinU);
  const Eigen::VectorXd& res_sv = res_svd.singularValues();
  const double scale = std::max({res_sv.size() > 0 ? res_sv[0] : 0.0,
                                 k0 > 0 ? forgetting * model.sigma()[0] : 0.0,
                                 proj.size() > 0 ? proj.cwiseAbs().maxCoeff() : 0.0});
  Eigen::Index r = 0;
  while (r < res_sv.size() && res_sv[r] > kRankCutoff * scale) ++r;
  const Eigen::MatrixXd Q_res = res_svd.matrixU().leftCols(r);

  // Core: [ f*diag(sigma)  U0^T data ; 0  Q_res^T residual ]
  const Eigen::Index core_rows = k0 + r;
  Eigen::MatrixXd core = Eigen::MatrixXd::Zero(core_rows, k0 + data.cols());
  if (k0 > 0) {
    core.topLeftCorner(k0, k0) = (forgetting * model.sigma()).asDiagonal();
    core.topRightCorner(k0, data.cols()) = proj;
  }
  if (r > 0) core.bottomRightCorner(r, data.cols()) = Q_res.transpose() * residual;

  Eigen::MatrixXd basis(d, 0);
  Eigen::VectorXd sigma(0);
  if (core_rows > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> core_svd(core, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = core_svd.singularValues();
    Eigen::Index keep = 0;
    const Eigen::Index limit = std::min<Eigen::Index>(model.max_basis(), sv.size());
    while (keep < limit && sv[keep] > kRankCutoff * std::max(sv[0], 1e-300)) ++keep;
    Eigen::MatrixXd stacked(d, core_rows);
    stacked.leftCols(k0) = U0;
    stacked.rightCols(r) = Q_res;
    basis = stacked * core_svd.matrixU().leftCols(keep);
    sigma = sv.head(keep);
  }
  reorthonormalize(basis);

  return SubspaceModel(std::move(mu), OrthonormalBasis(std::move(basis)), std::move(sigma),
                       prior_n + static_cast<double>(m), model.max_basis());
}

}  // namespace igdts
