#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace igdts {

// Parameters of the two noise components: a dense Gaussian term and a
// sparse-tailed Laplacian term. Construction rejects non-positive scales.
class NoiseParams {
 public:
  NoiseParams(double sigma_g, double sigma_l, double mu_g = 0.0, double mu_l = 0.0);

  double sigma_g() const noexcept { return sigma_g_; }
  double sigma_l() const noexcept { return sigma_l_; }
  double mu_g() const noexcept { return mu_g_; }
  double mu_l() const noexcept { return mu_l_; }

 private:
  double sigma_g_;
  double sigma_l_;
  double mu_g_;
  double mu_l_;
};

double gaussian_pdf(double x, const NoiseParams& params);
double laplacian_pdf(double x, const NoiseParams& params);

// Scaled complementary error function exp(x^2) * erfc(x). Finite for all
// x >= -26; throws DomainError on non-finite input.
double erfcx(double x);

// Density of omega + gamma with omega ~ N(0, sigma_g^2) and gamma ~
// Laplace(0, sigma_l). Means in `params` must be zero.
//
//   f(e) = 1/(4 sl) * exp(-e^2 / (2 sg^2)) *
//          [ erfcx(sg/(sqrt2 sl) - e/(sqrt2 sg)) + erfcx(sg/(sqrt2 sl) + e/(sqrt2 sg)) ]
//
// Each bracket term is evaluated jointly with the Gaussian factor so that
// large |e| neither overflows nor loses the Laplacian tail.
double gl_pdf(double eps, const NoiseParams& params);

// Regularization weight implied by the noise levels: sqrt(2 pi) sg^2 / sl.
double lambda_from_noise(const NoiseParams& params);

// n draws of omega + gamma (both i.i.d., means from params). Deterministic in seed.
std::vector<double> sample_gl(std::size_t n, const NoiseParams& params, std::uint64_t seed);

}  // namespace igdts
