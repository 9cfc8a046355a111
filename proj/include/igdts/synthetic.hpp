#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "igdts/box.hpp"
#include "igdts/imaging_io.hpp"

namespace igdts {

// y = X beta + omega + gamma with Gaussian omega and a sparse outlier vector
// gamma. Outliers are Laplacian(sigma_l) draws, or +/- outlier_magnitude
// with random sign when that is positive.
struct RegressionSpec {
  int n = 200;
  int p = 8;
  double outlier_frac = 0.1;
  double sigma_g = 0.1;
  double sigma_l = 1.0;
  double outlier_magnitude = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticRegression {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  std::vector<int> outliers;  // 0-based rows, ascending
};

SyntheticRegression make_regression(const RegressionSpec& spec);

// CSV with header y,x1..xp; the sidecar holds "beta,<b1>,...,<bp>" and
// "outliers,<row>,..." (1-based data rows).
void write_regression_csv(const std::filesystem::path& path, const SyntheticRegression& data);
void write_regression_truth(const std::filesystem::path& path, const SyntheticRegression& data);

struct RegressionCsv {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};
RegressionCsv read_regression_csv(const std::filesystem::path& path);

// Smooth deterministic texture: lattice values on a `cell`-pixel grid,
// smoothstep-interpolated, mapped into [lo, hi].
class ValueNoise {
 public:
  ValueNoise(std::uint64_t seed, int width, int height, double cell, double lo, double hi);
  double operator()(double x, double y) const;

 private:
  int gw_, gh_;
  double cell_;
  std::vector<double> lattice_;
};

enum class MotionPreset { kStatic, kRandomWalk };

struct SequenceSpec {
  int n_frames = 120;
  int width = 160;
  int height = 120;
  int target_size = 24;
  MotionPreset motion = MotionPreset::kRandomWalk;
  double step_sigma = 1.0;  // px per frame, random-walk preset
  int occlusion_first = 0;  // 1-based inclusive window; 0 disables
  int occlusion_last = 0;
  double occlusion_fraction = 0.3;  // share of target columns covered
  double illumination_ramp = 0.0;   // total gain drop over the sequence
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticSequence {
  std::vector<Frame> frames;
  GroundTruth truth;
  std::vector<Box> occluders;  // zero-size when no occluder is drawn
};

// Textured target on a textured background. Pixel values are quantized to
// 8 bits so frames written as PGM read back identically.
SyntheticSequence make_sequence(const SequenceSpec& spec);

// Writes 0001.pgm, 0002.pgm, ... and groundtruth.txt.
void write_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq);

// Template set and two candidates for the distance comparison: the clean
// candidate is a fresh noisy view of the object, the occluded one is shifted
// by a few pixels with a block covering part of it. Columns of `templates`
// are vectorized side x side patches.
struct DistanceDemoSet {
  Eigen::MatrixXd templates;
  Eigen::VectorXd clean;
  Eigen::VectorXd occluded;
  int side = 32;
};
DistanceDemoSet make_distance_demo(std::uint64_t seed, int side = 32, int n_templates = 4);

}  // namespace igdts
