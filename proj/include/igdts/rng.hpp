#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace igdts {

// One seed -> one reproducible stream. Independent sub-streams are derived
// with split(), which hashes (seed, stream id) through seed_seq so that
// sibling streams never share state.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(make_seq(seed, 0)) {}

  Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }

  double normal() { return normal_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }

  // Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  // Zero-mean Laplacian with scale b via inverse CDF.
  double laplacian(double scale) {
    double u = uniform() - 0.5;
    while (u == -0.5) u = uniform() - 0.5;
    const double mag = -scale * std::log1p(-2.0 * std::abs(u));
    return u < 0.0 ? -mag : mag;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  Engine& engine() noexcept { return engine_; }

 private:
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), engine_(make_seq(seed, stream)) {}

  static Engine make_seq(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Engine(seq);
  }

  std::uint64_t seed_;
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace igdts
