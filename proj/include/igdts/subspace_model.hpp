#pragma once

#include <vector>

#include <Eigen/Core>

#include "igdts/slope_threshold.hpp"

namespace igdts {

// d x k matrix whose columns are checked orthonormal on construction.
// Throws DomainError when ||U^T U - I||_max exceeds the tolerance.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  explicit OrthonormalBasis(Eigen::MatrixXd U, double tolerance = 1e-8);

  const Eigen::MatrixXd& matrix() const noexcept { return U_; }
  Eigen::Index dim() const noexcept { return U_.rows(); }
  Eigen::Index size() const noexcept { return U_.cols(); }

 private:
  Eigen::MatrixXd U_;
};

// PCA appearance model: mean template, orthonormal basis, singular values and
// the effective sample count under forgetting. An empty model has no mean.
class SubspaceModel {
 public:
  explicit SubspaceModel(int max_basis = 16);
  SubspaceModel(Eigen::VectorXd mu, OrthonormalBasis basis, Eigen::VectorXd sigma, double n_eff, int max_basis);

  bool empty() const noexcept { return mu_.size() == 0; }
  Eigen::Index dim() const noexcept { return mu_.size(); }
  int max_basis() const noexcept { return max_basis_; }
  const Eigen::VectorXd& mu() const noexcept { return mu_; }
  const OrthonormalBasis& basis() const noexcept { return basis_; }
  const Eigen::VectorXd& sigma() const noexcept { return sigma_; }
  double n_eff() const noexcept { return n_eff_; }

 private:
  Eigen::VectorXd mu_;
  OrthonormalBasis basis_;
  Eigen::VectorXd sigma_;
  double n_eff_ = 0.0;
  int max_basis_;
};

struct IgdtsSubspaceSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd gamma;
  double distance = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
};

// Alternating solver for min_{z,gamma} 0.5||y_bar - U z - gamma||^2 + J_lambda(gamma).
// The z-step is U^T (y_bar - gamma) because U^T U = I. Holds scratch buffers
// and the magnitude ordering between calls, so one instance per worker
// amortizes allocation across candidates.
class SubspaceSolver {
 public:
  SubspaceSolver(LambdaSequence lambda, double eps = 1e-8, int max_iter = 500);

  IgdtsSubspaceSolution solve(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis,
                              bool keep_trace = true);
  // Objective only; skips trace and solution copies.
  double distance(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis);

  const LambdaSequence& lambda() const noexcept { return threshold_.lambda(); }

 private:
  double run(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis, std::vector<double>* trace,
             int* iterations);

  SortedSoftThresholder threshold_;
  double eps_;
  int max_iter_;
  Eigen::VectorXd z_, gamma_, residual_, work_;
};

IgdtsSubspaceSolution igdts_subspace_solve(const Eigen::VectorXd& y_bar, const OrthonormalBasis& basis,
                                           const LambdaSequence& lambda, double eps = 1e-8, int max_iter = 500);
// Validates orthonormality of U first.
IgdtsSubspaceSolution igdts_subspace_solve(const Eigen::VectorXd& y_bar, const Eigen::MatrixXd& U,
                                           const LambdaSequence& lambda, double eps = 1e-8, int max_iter = 500);

double subspace_distance(const Eigen::VectorXd& y, const SubspaceModel& model, const LambdaSequence& lambda,
                         double eps = 1e-8, int max_iter = 500);

// -kappa * subspace_distance; the likelihood itself underflows for large distances.
double observation_log_likelihood(const Eigen::VectorXd& y, const SubspaceModel& model,
                                  const LambdaSequence& lambda, double kappa, double eps = 1e-8,
                                  int max_iter = 500);
double observation_likelihood(const Eigen::VectorXd& y, const SubspaceModel& model, const LambdaSequence& lambda,
                              double kappa, double eps = 1e-8, int max_iter = 500);

// Pixels flagged by a nonzero gamma are replaced by the model mean.
Eigen::VectorXd clean_observation(const Eigen::VectorXd& y_o, const Eigen::VectorXd& gamma_o,
                                  const Eigen::VectorXd& mu);

// Mean-augmented incremental SVD. The prior factorization is down-weighted
// by `forgetting`, the batch deviations and a mean-correction column are
// appended, the small core is re-decomposed and the basis truncated to
// max_basis (directions with negligible singular value are dropped). On an
// empty model this is batch PCA of `batch` (columns are observations).
SubspaceModel incremental_update(const SubspaceModel& model, const Eigen::MatrixXd& batch, double forgetting);

}  // namespace igdts
