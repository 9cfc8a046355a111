#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "igdts/errors.hpp"
#include "igdts/noise_model.hpp"
#include "igdts/rng.hpp"
#include "oracles.hpp"

using namespace igdts;
using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

TEST(NoiseParams, RejectsNonPositiveScales) {
  EXPECT_THROW(NoiseParams(0.0, 1.0), DomainError);
  EXPECT_THROW(NoiseParams(1.0, -1.0), DomainError);
  EXPECT_THROW(NoiseParams(NAN, 1.0), DomainError);
  EXPECT_NO_THROW(NoiseParams(1.0, 1.0));
}

TEST(GaussianPdf, ModeSymmetryAndMass) {
  const NoiseParams p(1.0, 1.0);
  EXPECT_NEAR(gaussian_pdf(0.0, p), 0.3989422804014327, 1e-15);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double x = 5 * rng.normal();
    EXPECT_EQ(gaussian_pdf(x, p), gaussian_pdf(-x, p));
  }
  const NoiseParams q(0.7, 1.0);
  const double mass = GK::integrate([&](double x) { return gaussian_pdf(x, q); }, -8 * 0.7, 8 * 0.7, 15, 1e-14);
  EXPECT_NEAR(mass, 1.0, 1e-8);
}

TEST(LaplacianPdf, KnownValues) {
  const NoiseParams p(1.0, 1.0);
  EXPECT_DOUBLE_EQ(laplacian_pdf(0.0, p), 0.5);
  EXPECT_NEAR(laplacian_pdf(1.0, p), 0.5 * std::exp(-1.0), 1e-15);
}

TEST(LaplacianSampler, VarianceIsTwiceScaleSquared) {
  Rng rng(11);
  const double b = 1.5;
  const int n = 1000000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.laplacian(b);
    sum += v;
    sum2 += v * v;
  }
  const double var = sum2 / n - (sum / n) * (sum / n);
  EXPECT_NEAR(var / (2 * b * b), 1.0, 0.02);
}

TEST(Erfcx, KnownValuesAndReflection) {
  EXPECT_DOUBLE_EQ(erfcx(0.0), 1.0);
  EXPECT_NEAR(erfcx(-0.5), 2 * std::exp(0.25) - erfcx(0.5), 1e-14);
  const double asym = 1.0 / (20 * std::sqrt(M_PI)) * (1 - 1.0 / (2 * 400));
  EXPECT_NEAR(erfcx(20.0) / asym, 1.0, 1e-4);
  EXPECT_THROW(erfcx(NAN), DomainError);
  EXPECT_THROW(erfcx(INFINITY), DomainError);
}

TEST(Erfcx, MatchesQuadratureOracle) {
  for (double x = -10.0; x <= 30.0; x += 0.25) {
    const double ref = oracle::erfcx_quadrature(x);
    EXPECT_NEAR(erfcx(x) / ref, 1.0, 1e-10) << "x = " << x;
  }
}

TEST(Erfcx, DecreasingOnNonNegativeAxis) {
  double prev = erfcx(0.0);
  for (double x = 0.05; x < 60; x += 0.05) {
    const double v = erfcx(x);
    EXPECT_LT(v, prev) << "x = " << x;
    prev = v;
  }
}

TEST(GlPdf, NormalizesAndMatchesConvolution) {
  for (double sg : {0.5, 1.0, 2.0}) {
    for (double sl : {0.5, 1.0, 2.0}) {
      const NoiseParams p(sg, sl);
      const double reach = 12 * (sg + sl);
      double mass = 0;
      for (int k = -4; k < 4; ++k)
        mass += GK::integrate([&](double e) { return gl_pdf(e, p); }, reach * k / 4, reach * (k + 1) / 4, 15, 1e-12);
      EXPECT_NEAR(mass, 1.0, 1e-6) << sg << " " << sl;
      for (int i = 0; i <= 200; ++i) {
        const double e = -6.0 + 12.0 * i / 200;
        EXPECT_NEAR(gl_pdf(e, p), oracle::gl_convolution(e, sg, sl), 1e-8) << sg << " " << sl << " " << e;
        EXPECT_EQ(gl_pdf(e, p), gl_pdf(-e, p));
        EXPECT_GE(gl_pdf(e, p), 0.0);
      }
    }
  }
}

TEST(GlPdf, DegenerateLaplacianApproachesGaussian) {
  const NoiseParams p(1.0, 1e-4);
  for (double e = -4; e <= 4; e += 0.1) EXPECT_NEAR(gl_pdf(e, p), gaussian_pdf(e, p), 1e-3);
}

TEST(GlPdf, FarTailStaysFinite) {
  const NoiseParams p(0.1, 1.0);
  for (double e : {5.0, 50.0, 500.0}) {
    const double v = gl_pdf(e, p);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
    // Deep in the tail the Laplacian dominates.
    if (e < 600) EXPECT_NEAR(std::log(v), std::log(0.5) - e + 0.005, 1e-6);
  }
}

TEST(GlPdf, RejectsNonZeroMeans) { EXPECT_THROW(gl_pdf(0.0, NoiseParams(1, 1, 0.5, 0)), DomainError); }

TEST(LambdaFromNoise, PrintedFormula) {
  EXPECT_NEAR(lambda_from_noise(NoiseParams(1.0, std::sqrt(2 * M_PI))), 1.0, 1e-15);
  EXPECT_NEAR(lambda_from_noise(NoiseParams(1.0, 1.0)), 2.5066282746310002, 1e-14);
  EXPECT_NEAR(lambda_from_noise(NoiseParams(2.0, 0.7)) / lambda_from_noise(NoiseParams(1.0, 0.7)), 4.0, 1e-14);
}

TEST(SampleGl, DeterministicAndMoments) {
  const NoiseParams p(0.5, 0.8);
  EXPECT_EQ(sample_gl(1000, p, 42), sample_gl(1000, p, 42));
  EXPECT_NE(sample_gl(10, p, 42), sample_gl(10, p, 43));
  EXPECT_TRUE(sample_gl(0, p, 1).empty());
  const auto v = sample_gl(1000000, p, 7);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= v.size() - 1;
  const double expected = 0.25 + 2 * 0.64;
  EXPECT_LT(std::abs(mean), 4 * std::sqrt(expected / v.size()));
  EXPECT_NEAR(var / expected, 1.0, 0.02);
}
