#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "igdts/affine.hpp"
#include "igdts/box.hpp"
#include "igdts/imaging_io.hpp"
#include "igdts/rng.hpp"
#include "igdts/slope_threshold.hpp"
#include "igdts/subspace_model.hpp"

namespace igdts {

// Per-parameter random-walk standard deviations in AffineState order
// (tx, ty, theta, scale, aspect, skew).
struct MotionModel {
  std::array<double, AffineState::kParams> sigma{4.0, 4.0, 0.01, 0.01, 0.002, 0.001};

  void validate() const;
};

enum class LostPolicy { kCoast, kHalt };

struct TrackerConfig {
  int n_particles = 600;
  int patch_side = 32;
  int k_basis = 16;
  int update_interval = 5;
  double lambda_max = 0.1;
  double lambda_min_ratio = 0.1;
  double kappa = 10.0;
  MotionModel motion;
  double forgetting = 0.95;
  std::uint64_t seed = 0;
  double eps = 1e-6;  // subspace solver tolerance
  int max_iter = 500;
  LostPolicy lost_policy = LostPolicy::kCoast;
  int threads = 1;

  void validate() const;
  LambdaSequence lambda() const;
};

struct TrackResult {
  int frame_index = 0;  // 1-based
  AffineState state;
  Box bbox;
  double distance = 0.0;
  double log_likelihood = 0.0;
  bool updated_model = false;
  bool lost = false;
};

// Scale and aspect walks reflect at this floor to stay positive.
inline constexpr double kShapeFloor = 1e-3;

std::vector<AffineState> propagate(const std::vector<AffineState>& states, const MotionModel& motion, Rng& rng);

struct ParticleScores {
  std::vector<double> distances;
  std::vector<double> log_likelihoods;
};

// Scores every state against the model. With an empty basis the distance is
// 0.5 ||y - mu||^2. Warps entirely outside the frame score +inf / -inf.
// Results are index-ordered and independent of config.threads.
ParticleScores evaluate_particles(const std::vector<AffineState>& states, const Frame& frame,
                                  const SubspaceModel& model, const TrackerConfig& config);

struct MapEstimate {
  std::size_t index;
  AffineState state;
};

// Argmax of the log-likelihood, lowest index on ties. Throws
// TrackingLostError (frame index 0) if every entry is -inf.
MapEstimate select_map(const std::vector<AffineState>& states, const std::vector<double>& log_likelihoods);

// Systematic resampling with log-sum-exp normalized weights.
std::vector<AffineState> resample(const std::vector<AffineState>& states, const std::vector<double>& log_likelihoods,
                                  std::size_t n_out, Rng& rng);

class Tracker {
 public:
  explicit Tracker(TrackerConfig config);

  // Frame 1: the state is taken from the box and the model mean is the
  // initial patch.
  TrackResult initialize(const Frame& frame, const Box& box);
  TrackResult step(const Frame& frame);

  const TrackerConfig& config() const noexcept { return config_; }
  const SubspaceModel& model() const noexcept { return model_; }
  const std::vector<AffineState>& particles() const noexcept { return particles_; }
  int frame_index() const noexcept { return frame_index_; }
  bool initialized() const noexcept { return frame_index_ > 0; }

 private:
  void push_observation(const Eigen::VectorXd& patch, const Eigen::VectorXd& gamma);
  bool maybe_update();

  TrackerConfig config_;
  LambdaSequence lambda_;
  Rng rng_;
  SubspaceModel model_;
  std::vector<AffineState> particles_;
  AffineState last_state_;
  std::vector<Eigen::VectorXd> buffer_;
  int frame_index_ = 0;
};

// Runs the tracker over all frames, the first seeded with `initial`.
std::vector<TrackResult> track_sequence(const std::vector<Frame>& frames, const Box& initial,
                                        const TrackerConfig& config);

}  // namespace igdts
