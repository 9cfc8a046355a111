#include "igdts/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "igdts/errors.hpp"
#include "igdts/rng.hpp"

namespace igdts {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

// Above this the product exp(x^2) * erfc(x) underflows/overflows in double.
constexpr double kAsymptoticBranch = 26.0;

// erfcx(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated backwards; at x >= 26 forty terms are far past convergence.
double erfcx_continued_fraction(double x) {
  double t = x;
  for (int k = 40; k >= 1; --k) t = x + 0.5 * k / t;
  return kInvSqrtPi / t;
}

double erfcx_nonnegative(double x) {
  if (x < kAsymptoticBranch) return std::exp(x * x) * std::erfc(x);
  return erfcx_continued_fraction(x);
}

// exp(-c) * erfcx(a) where exp(a^2 - c) is supplied separately as
// `log_cross` = a^2 - c so that negative a never overflows.
double damped_erfcx(double a, double c, double log_cross) {
  if (a >= 0.0) return std::exp(-c) * erfcx_nonnegative(a);
  return 2.0 * std::exp(log_cross) - std::exp(-c) * erfcx_nonnegative(-a);
}

}  // namespace

NoiseParams::NoiseParams(double sigma_g, double sigma_l, double mu_g, double mu_l)
    : sigma_g_(sigma_g), sigma_l_(sigma_l), mu_g_(mu_g), mu_l_(mu_l) {
  if (!(sigma_g > 0.0) || !std::isfinite(sigma_g))
    throw DomainError("NoiseParams: sigma_g must be positive and finite, got " + std::to_string(sigma_g));
  if (!(sigma_l > 0.0) || !std::isfinite(sigma_l))
    throw DomainError("NoiseParams: sigma_l must be positive and finite, got " + std::to_string(sigma_l));
  if (!std::isfinite(mu_g) || !std::isfinite(mu_l)) throw DomainError("NoiseParams: means must be finite");
}

double gaussian_pdf(double x, const NoiseParams& params) {
  const double s = params.sigma_g();
  const double z = (x - params.mu_g()) / s;
  return kInvSqrtPi / (kSqrt2 * s) * std::exp(-0.5 * z * z);
}

double laplacian_pdf(double x, const NoiseParams& params) {
  const double b = params.sigma_l();
  return 0.5 / b * std::exp(-std::abs(x - params.mu_l()) / b);
}

double erfcx(double x) {
  if (!std::isfinite(x)) throw DomainError("erfcx: non-finite argument");
  if (x >= 0.0) return erfcx_nonnegative(x);
  return 2.0 * std::exp(x * x) - erfcx_nonnegative(-x);
}

double gl_pdf(double eps, const NoiseParams& params) {
  if (params.mu_g() != 0.0 || params.mu_l() != 0.0)
    throw DomainError("gl_pdf: only the zero-mean density is defined");
  const double s = params.sigma_g();
  const double b = params.sigma_l();
  const double c = eps * eps / (2.0 * s * s);
  const double base = s / (kSqrt2 * b);
  const double shift = eps / (kSqrt2 * s);
  const double ratio = s * s / (2.0 * b * b);
  const double lower = damped_erfcx(base - shift, c, ratio - eps / b);
  const double upper = damped_erfcx(base + shift, c, ratio + eps / b);
  return std::max(0.0, 0.25 / b * (lower + upper));
}

double lambda_from_noise(const NoiseParams& params) {
  const double s = params.sigma_g();
  return std::sqrt(2.0 * std::numbers::pi) * s * s / params.sigma_l();
}

std::vector<double> sample_gl(std::size_t n, const NoiseParams& params, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double omega = rng.normal(params.mu_g(), params.sigma_g());
    const double gamma = params.mu_l() + rng.laplacian(params.sigma_l());
    out.push_back(omega + gamma);
  }
  return out;
}

}  // namespace igdts
