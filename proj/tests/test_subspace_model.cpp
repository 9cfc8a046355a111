#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "igdts/errors.hpp"
#include "igdts/rng.hpp"
#include "igdts/subspace_model.hpp"
#include "oracles.hpp"

using namespace igdts;

namespace {

Eigen::MatrixXd gaussian_matrix(Rng& rng, int n, int p) {
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

Eigen::MatrixXd random_basis(Rng& rng, int d, int k) {
  const Eigen::MatrixXd A = gaussian_matrix(rng, d, k);
  return A.householderQr().householderQ() * Eigen::MatrixXd::Identity(d, k);
}

Eigen::VectorXd gaussian_vector(Rng& rng, int d, double scale = 1.0) {
  Eigen::VectorXd v(d);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

double orthonormality_error(const Eigen::MatrixXd& U) {
  if (U.cols() == 0) return 0.0;
  return (U.transpose() * U - Eigen::MatrixXd::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

// Rank-r source around a mean: mean + B * coefficients.
Eigen::MatrixXd low_rank_batch(Rng& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& B, int m) {
  Eigen::MatrixXd out(mean.size(), m);
  for (int j = 0; j < m; ++j) out.col(j) = mean + B * gaussian_vector(rng, static_cast<int>(B.cols()), 3.0);
  return out;
}

}  // namespace

TEST(OrthonormalBasis, RejectsNonOrthonormal) {
  EXPECT_NO_THROW(OrthonormalBasis(Eigen::MatrixXd::Identity(4, 2)));
  EXPECT_THROW(OrthonormalBasis(2.0 * Eigen::MatrixXd::Identity(4, 2)), DomainError);
  EXPECT_THROW(OrthonormalBasis(Eigen::MatrixXd::Identity(2, 3)), DomainError);
  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(igdts_subspace_solve(Eigen::VectorXd::Ones(3), Eigen::MatrixXd(U * 1.1),
                                    LambdaSequence::constant(3, 0.1)),
               DomainError);
}

TEST(SubspaceSolve, InSubspaceObservation) {
  Rng rng(1);
  const Eigen::MatrixXd U = random_basis(rng, 40, 5);
  const Eigen::VectorXd z = gaussian_vector(rng, 5);
  const auto sol = igdts_subspace_solve(U * z, U, LambdaSequence::linear(40, 0.3, 0.03));
  EXPECT_LE((sol.z - z).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(sol.gamma, Eigen::VectorXd::Zero(40));
}

TEST(SubspaceSolve, OrthogonalObservationInKillZone) {
  Rng rng(2);
  const Eigen::MatrixXd U = random_basis(rng, 30, 3);
  Eigen::VectorXd y = gaussian_vector(rng, 30);
  y -= U * (U.transpose() * y);
  const auto sol = igdts_subspace_solve(y, U, LambdaSequence::constant(30, 1e6));
  EXPECT_LE(sol.z.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(sol.gamma, Eigen::VectorXd::Zero(30));
  EXPECT_NEAR(sol.distance, 0.5 * y.squaredNorm(), 1e-12);
}

TEST(SubspaceSolve, RecoversPlantedOcclusion) {
  std::vector<double> f1s;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    const Eigen::MatrixXd U = random_basis(rng, 64, 4);
    const Eigen::VectorXd z = gaussian_vector(rng, 4, 2.0);
    Eigen::VectorXd y = U * z + gaussian_vector(rng, 64, 0.01);
    std::set<int> truth;
    const int start = static_cast<int>(rng.uniform() * 56);
    for (int i = start; i < start + 8; ++i) {
      y[i] += 5.0;
      truth.insert(i);
    }
    // Weights sit at 5-10x the noise level; the shrinkage bias they leave on z stays small.
    const auto sol = igdts_subspace_solve(y, U, LambdaSequence::linear(64, 0.1, 0.05), 1e-12, 100000);
    f1s.push_back(oracle::f1(oracle::support(sol.gamma), truth));
    EXPECT_LE((sol.z - z).norm(), 0.05 * z.norm()) << "seed " << seed;
  }
  for (double f : f1s) EXPECT_GE(f, 0.9);
}

TEST(SubspaceSolve, DistanceMatchesRecomputedObjective) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd U = random_basis(rng, 50, 4);
    Eigen::VectorXd y = gaussian_vector(rng, 50);
    y[t] += 4;
    const auto lam = LambdaSequence::linear(50, 0.6, 0.06);
    const auto sol = igdts_subspace_solve(y, U, lam);
    const std::vector<double> lv(lam.values().begin(), lam.values().end());
    const double recomputed = 0.5 * (y - U * sol.z - sol.gamma).squaredNorm() + oracle::sorted_l1(sol.gamma, lv);
    EXPECT_NEAR(sol.distance, recomputed, 1e-10);
  }
}

TEST(SubspaceSolve, ObjectiveTraceNonIncreasing) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const Eigen::MatrixXd U = random_basis(rng, 64, 4);
    Eigen::VectorXd y = U * gaussian_vector(rng, 4) + gaussian_vector(rng, 64, 0.1);
    for (int i = 0; i < 6; ++i) y[(7 * t + 11 * i) % 64] += 3.0;
    const auto sol = igdts_subspace_solve(y, U, LambdaSequence::linear(64, 0.5, 0.05));
    for (std::size_t j = 1; j < sol.objective_trace.size(); ++j)
      EXPECT_LE(sol.objective_trace[j], sol.objective_trace[j - 1] + 1e-10) << "trial " << t << " j " << j;
  }
}

TEST(SubspaceSolve, ReusedSolverMatchesFreshSolve) {
  Rng rng(5);
  const Eigen::MatrixXd U = random_basis(rng, 64, 4);
  const OrthonormalBasis basis(U);
  const auto lam = LambdaSequence::linear(64, 0.5, 0.05);
  SubspaceSolver solver(lam);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd y = gaussian_vector(rng, 64);
    y[t] += 5;
    EXPECT_EQ(solver.distance(y, basis), igdts_subspace_solve(y, basis, lam).distance);
  }
}

TEST(SubspaceDistance, ExamplesAndBounds) {
  Rng rng(6);
  const Eigen::MatrixXd U = random_basis(rng, 36, 3);
  const Eigen::VectorXd mu = gaussian_vector(rng, 36);
  const SubspaceModel model(mu, OrthonormalBasis(U), Eigen::Vector3d(3, 2, 1), 10, 16);
  const auto lam = LambdaSequence::linear(36, 0.2, 0.02);
  EXPECT_EQ(subspace_distance(mu, model, lam), 0.0);
  EXPECT_NEAR(subspace_distance(mu + U.col(0), model, lam), 0.0, 1e-10);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd y = mu + gaussian_vector(rng, 36);
    EXPECT_LE(subspace_distance(y, model, lam), 0.5 * (y - mu).squaredNorm() + 1e-12);
  }
  EXPECT_THROW(subspace_distance(Eigen::VectorXd::Zero(5), model, lam), DimensionError);
  EXPECT_THROW(subspace_distance(mu, SubspaceModel(4), lam), DomainError);
}

TEST(SubspaceDistance, InvariantUnderBasisRotation) {
  Rng rng(7);
  const Eigen::MatrixXd U = random_basis(rng, 49, 4);
  const Eigen::MatrixXd Q = random_basis(rng, 4, 4);
  const Eigen::VectorXd mu = gaussian_vector(rng, 49);
  const Eigen::VectorXd sigma = Eigen::Vector4d(4, 3, 2, 1);
  const SubspaceModel a(mu, OrthonormalBasis(U), sigma, 5, 16);
  const SubspaceModel b(mu, OrthonormalBasis(U * Q), sigma, 5, 16);
  const auto lam = LambdaSequence::linear(49, 0.4, 0.04);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd y = mu + gaussian_vector(rng, 49);
    y[t] += 3;
    EXPECT_NEAR(subspace_distance(y, a, lam, 1e-14, 20000), subspace_distance(y, b, lam, 1e-14, 20000), 1e-9);
  }
}

TEST(ObservationLikelihood, Laws) {
  Rng rng(8);
  const Eigen::MatrixXd U = random_basis(rng, 25, 2);
  const Eigen::VectorXd mu = gaussian_vector(rng, 25);
  const SubspaceModel model(mu, OrthonormalBasis(U), Eigen::Vector2d(2, 1), 5, 16);
  const auto lam = LambdaSequence::linear(25, 0.3, 0.03);
  EXPECT_EQ(observation_likelihood(mu, model, lam, 10), 1.0);
  EXPECT_THROW(observation_likelihood(mu, model, lam, 0), DomainError);
  std::vector<std::pair<double, double>> pairs;
  for (int t = 0; t < 30; ++t) {
    const Eigen::VectorXd y = mu + gaussian_vector(rng, 25, 0.2);
    const double l1 = observation_likelihood(y, model, lam, 2);
    const double l2 = observation_likelihood(y, model, lam, 4);
    EXPECT_NEAR(l2, l1 * l1, 1e-14);
    EXPECT_GT(l1, 0.0);
    EXPECT_LE(l1, 1.0);
    pairs.emplace_back(subspace_distance(y, model, lam), l1);
  }
  for (const auto& [da, la] : pairs)
    for (const auto& [db, lb] : pairs)
      if (da < db) EXPECT_GT(la, lb);
  // Far observations underflow the likelihood but not its logarithm.
  const Eigen::VectorXd far = mu + Eigen::VectorXd::Constant(25, 1e3);
  EXPECT_TRUE(std::isfinite(observation_log_likelihood(far, model, lam, 10)));
  EXPECT_GE(observation_likelihood(far, model, lam, 10), 0.0);
}

TEST(CleanObservation, MaskSelection) {
  const Eigen::Vector3d y(1, 2, 3), mu(7, 8, 9);
  EXPECT_EQ(clean_observation(y, Eigen::Vector3d::Zero(), mu), y);
  EXPECT_EQ(clean_observation(y, Eigen::Vector3d(0.1, -2, 1e-300), mu), mu);
  Rng rng(9);
  const Eigen::VectorXd a = gaussian_vector(rng, 100), m = gaussian_vector(rng, 100);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(100);
  for (int i = 0; i < 100; i += 3) g[i] = rng.normal();
  const Eigen::VectorXd out = clean_observation(a, g, m);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(out[i], i % 3 == 0 ? m[i] : a[i]);
  EXPECT_THROW(clean_observation(a, g.head(5), m), DimensionError);
}

TEST(IncrementalUpdate, FirstBatchCapturesRankThreeSource) {
  Rng rng(10);
  const Eigen::MatrixXd B = random_basis(rng, 64, 3);
  const Eigen::VectorXd mean = gaussian_vector(rng, 64);
  Eigen::MatrixXd batch = low_rank_batch(rng, mean, B, 20);
  batch += 0.01 * gaussian_matrix(rng, 64, 20);
  const auto model = incremental_update(SubspaceModel(3), batch, 1.0);
  ASSERT_EQ(model.basis().size(), 3);
  const Eigen::MatrixXd centred = batch.colwise() - batch.rowwise().mean();
  const Eigen::MatrixXd& U = model.basis().matrix();
  const double captured = (U.transpose() * centred).squaredNorm() / centred.squaredNorm();
  EXPECT_GE(captured, 0.99);
  EXPECT_LE(orthonormality_error(U), 1e-8);
  EXPECT_LE((model.mu() - batch.rowwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(model.n_eff(), 20.0);
  EXPECT_LE(oracle::max_principal_angle(oracle::batch_pca(batch, 3), U), 1e-6);
}

TEST(IncrementalUpdate, TwoBatchesMatchConcatenatedPca) {
  Rng rng(11);
  // Noiseless rank-3 source: truncation to k = 3 loses nothing.
  const Eigen::MatrixXd B = random_basis(rng, 64, 3);
  const Eigen::VectorXd mean = gaussian_vector(rng, 64);
  const Eigen::MatrixXd b1 = low_rank_batch(rng, mean, B, 10);
  const Eigen::MatrixXd b2 = low_rank_batch(rng, mean + 0.5 * B.col(0), B, 10);
  const auto m1 = incremental_update(SubspaceModel(3), b1, 1.0);
  const auto m2 = incremental_update(m1, b2, 1.0);
  Eigen::MatrixXd all(64, 20);
  all << b1, b2;
  EXPECT_LE(oracle::max_principal_angle(oracle::batch_pca(all, 3), m2.basis().matrix()), 1e-6);
  EXPECT_LE((m2.mu() - all.rowwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(m2.n_eff(), 20.0);
}

TEST(IncrementalUpdate, UntruncatedNoisyBatchesMatchConcatenatedPca) {
  Rng rng(12);
  const Eigen::MatrixXd b1 = gaussian_matrix(rng, 30, 6);
  const Eigen::MatrixXd b2 = gaussian_matrix(rng, 30, 7).array() + 1.0;
  const auto m2 = incremental_update(incremental_update(SubspaceModel(30), b1, 1.0), b2, 1.0);
  Eigen::MatrixXd all(30, 13);
  all << b1, b2;
  // 13 centred samples span 12 dimensions.
  ASSERT_EQ(m2.basis().size(), 12);
  EXPECT_LE(oracle::max_principal_angle(oracle::batch_pca(all, 12), m2.basis().matrix()), 1e-6);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(all.colwise() - all.rowwise().mean());
  EXPECT_LE((m2.sigma() - svd.singularValues().head(12)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(IncrementalUpdate, OrthonormalAndTruncatedUnderForgetting) {
  Rng rng(13);
  SubspaceModel model(5);
  for (int round = 0; round < 30; ++round) {
    model = incremental_update(model, gaussian_matrix(rng, 40, 5), 0.9);
    EXPECT_LE(model.basis().size(), 5);
    EXPECT_LE(orthonormality_error(model.basis().matrix()), 1e-8);
    for (Eigen::Index i = 1; i < model.sigma().size(); ++i) EXPECT_LE(model.sigma()[i], model.sigma()[i - 1]);
  }
  EXPECT_NEAR(model.n_eff(), 5.0 * (1 - std::pow(0.9, 30)) / 0.1, 1e-9);
}

TEST(IncrementalUpdate, EmptyBatchIsNoOpAndErrors) {
  Rng rng(14);
  const auto model = incremental_update(SubspaceModel(4), gaussian_matrix(rng, 10, 3), 1.0);
  const auto same = incremental_update(model, Eigen::MatrixXd(10, 0), 1.0);
  EXPECT_EQ(same.mu(), model.mu());
  EXPECT_EQ(same.basis().matrix(), model.basis().matrix());
  EXPECT_THROW(incremental_update(model, gaussian_matrix(rng, 11, 2), 1.0), DimensionError);
  EXPECT_THROW(incremental_update(model, gaussian_matrix(rng, 10, 2), 0.0), DomainError);
}
