#include "igdts/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "igdts/errors.hpp"

namespace igdts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double reflect_floor(double v) { return v < kShapeFloor ? 2.0 * kShapeFloor - v : v; }

}  // namespace

void MotionModel::validate() const {
  for (double s : sigma)
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("MotionModel: standard deviations must be finite and >= 0");
}

void TrackerConfig::validate() const {
  if (n_particles < 1 || patch_side < 2 || k_basis < 1 || update_interval < 1 || max_iter < 1 || threads < 1)
    throw DomainError("TrackerConfig: counts must be at least 1 (patch_side at least 2)");
  if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) throw DomainError("TrackerConfig: lambda_max must be >= 0");
  if (!(lambda_min_ratio >= 0.0 && lambda_min_ratio <= 1.0))
    throw DomainError("TrackerConfig: lambda_min_ratio must lie in [0, 1]");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("TrackerConfig: kappa must be positive");
  if (!(forgetting > 0.0 && forgetting <= 1.0)) throw DomainError("TrackerConfig: forgetting must lie in (0, 1]");
  if (!(eps > 0.0)) throw DomainError("TrackerConfig: eps must be positive");
  if (k_basis > patch_side * patch_side) throw DomainError("TrackerConfig: k_basis exceeds the patch dimension");
  motion.validate();
}

LambdaSequence TrackerConfig::lambda() const {
  const auto d = static_cast<std::size_t>(patch_side) * patch_side;
  return LambdaSequence::linear(d, lambda_max, lambda_max * lambda_min_ratio);
}

std::vector<AffineState> propagate(const std::vector<AffineState>& states, const MotionModel& motion, Rng& rng) {
  std::vector<AffineState> out;
  out.reserve(states.size());
  for (const AffineState& s : states) {
    auto p = s.as_array();
    for (std::size_t j = 0; j < AffineState::kParams; ++j) p[j] += motion.sigma[j] * rng.normal();
    AffineState next = AffineState::from_array(p);
    next.scale = reflect_floor(next.scale);
    next.aspect = reflect_floor(next.aspect);
    out.push_back(next);
  }
  return out;
}

ParticleScores evaluate_particles(const std::vector<AffineState>& states, const Frame& frame,
                                  const SubspaceModel& model, const TrackerConfig& config) {
  if (model.empty()) throw DomainError("evaluate_particles: model has no mean");
  const auto d = static_cast<Eigen::Index>(config.patch_side) * config.patch_side;
  if (model.dim() != d) throw DimensionError("evaluate_particles: model dimension does not match patch_side^2");

  ParticleScores scores;
  scores.distances.assign(states.size(), kInf);
  scores.log_likelihoods.assign(states.size(), -kInf);
  const LambdaSequence lambda = config.lambda();

  auto work = [&](std::size_t begin, std::size_t end) {
    SubspaceSolver solver(lambda, config.eps, config.max_iter);
    Eigen::VectorXd patch, centered;
    for (std::size_t i = begin; i < end; ++i) {
      if (!states[i].valid() || warp_outside_frame(frame, states[i], config.patch_side)) continue;
      warp_patch(frame, states[i], config.patch_side, patch);
      centered = patch - model.mu();
      const double dist = model.basis().size() == 0 ? 0.5 * centered.squaredNorm()
                                                    : solver.distance(centered, model.basis());
      scores.distances[i] = dist;
      scores.log_likelihoods[i] = -config.kappa * dist;
    }
  };

  const std::size_t n = states.size();
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    work(0, n);
    return scores;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, n * w / workers, n * (w + 1) / workers);
  for (auto& t : pool) t.join();
  return scores;
}

MapEstimate select_map(const std::vector<AffineState>& states, const std::vector<double>& log_likelihoods) {
  if (states.empty() || states.size() != log_likelihoods.size())
    throw DimensionError("select_map: need equal, non-empty state and likelihood lists");
  std::size_t best = 0;
  for (std::size_t i = 1; i < log_likelihoods.size(); ++i)
    if (log_likelihoods[i] > log_likelihoods[best]) best = i;
  if (!(log_likelihoods[best] > -kInf)) throw TrackingLostError("every particle has zero likelihood", 0);
  return {best, states[best]};
}

std::vector<AffineState> resample(const std::vector<AffineState>& states, const std::vector<double>& log_likelihoods,
                                  std::size_t n_out, Rng& rng) {
  if (states.empty() || states.size() != log_likelihoods.size())
    throw DimensionError("resample: need equal, non-empty state and likelihood lists");
  const double top = *std::max_element(log_likelihoods.begin(), log_likelihoods.end());
  if (!(top > -kInf) || std::isnan(top)) throw DomainError("resample: all weights are zero");
  std::vector<double> cumulative(states.size());
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    total += std::exp(log_likelihoods[i] - top);
    cumulative[i] = total;
  }
  std::vector<AffineState> out;
  out.reserve(n_out);
  const double step = total / static_cast<double>(n_out);
  const double u0 = rng.uniform() * step;
  std::size_t j = 0;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double target = u0 + static_cast<double>(k) * step;
    while (j + 1 < states.size() && cumulative[j] <= target) ++j;
    out.push_back(states[j]);
  }
  return out;
}

Tracker::Tracker(TrackerConfig config)
    : config_(std::move(config)), rng_(config_.seed), model_(config_.k_basis) {
  config_.validate();
  lambda_ = config_.lambda();
}

TrackResult Tracker::initialize(const Frame& frame, const Box& box) {
  const double side = config_.patch_side;
  last_state_ = state_from_box(box, side, side);
  const Eigen::VectorXd patch = warp_patch(frame, last_state_, config_.patch_side);
  // Cold start: the mean is the initial patch and the basis is empty until
  // the first update.
  model_ = SubspaceModel(patch, OrthonormalBasis(Eigen::MatrixXd(patch.size(), 0)), Eigen::VectorXd(0), 0.0,
                         config_.k_basis);
  buffer_.clear();
  buffer_.push_back(patch);
  particles_.assign(static_cast<std::size_t>(config_.n_particles), last_state_);
  frame_index_ = 1;

  TrackResult r;
  r.frame_index = 1;
  r.state = last_state_;
  r.bbox = affine_to_bbox(last_state_, side, side);
  r.updated_model = maybe_update();
  return r;
}

void Tracker::push_observation(const Eigen::VectorXd& patch, const Eigen::VectorXd& gamma) {
  buffer_.push_back(gamma.size() == 0 ? patch : clean_observation(patch, gamma, model_.mu()));
}

bool Tracker::maybe_update() {
  if (frame_index_ % config_.update_interval != 0 || buffer_.empty()) return false;
  Eigen::MatrixXd batch(buffer_.front().size(), static_cast<Eigen::Index>(buffer_.size()));
  for (std::size_t i = 0; i < buffer_.size(); ++i) batch.col(static_cast<Eigen::Index>(i)) = buffer_[i];
  buffer_.clear();
  // The cold-start mean is a placeholder, so the first update is batch PCA.
  const SubspaceModel prior = model_.basis().size() == 0 && model_.n_eff() == 0.0 ? SubspaceModel(config_.k_basis)
                                                                                  : model_;
  model_ = incremental_update(prior, batch, config_.forgetting);
  return true;
}

TrackResult Tracker::step(const Frame& frame) {
  if (!initialized()) throw DomainError("Tracker::step: call initialize first");
  ++frame_index_;
  const double side = config_.patch_side;

  particles_ = propagate(particles_, config_.motion, rng_);
  const ParticleScores scores = evaluate_particles(particles_, frame, model_, config_);

  TrackResult r;
  r.frame_index = frame_index_;
  std::optional<MapEstimate> best;
  try {
    best = select_map(particles_, scores.log_likelihoods);
  } catch (const TrackingLostError&) {
    if (config_.lost_policy == LostPolicy::kHalt)
      throw TrackingLostError("tracking lost at frame " + std::to_string(frame_index_), frame_index_);
  }

  if (!best) {
    // Coast: report the last good state and restart the walk from it.
    r.state = last_state_;
    r.bbox = affine_to_bbox(last_state_, side, side);
    r.distance = kInf;
    r.log_likelihood = -kInf;
    r.lost = true;
    r.updated_model = maybe_update();
    particles_.assign(particles_.size(), last_state_);
    return r;
  }

  last_state_ = best->state;
  r.state = best->state;
  r.bbox = affine_to_bbox(best->state, side, side);
  r.distance = scores.distances[best->index];
  r.log_likelihood = scores.log_likelihoods[best->index];

  const Eigen::VectorXd patch = warp_patch(frame, best->state, config_.patch_side);
  Eigen::VectorXd gamma;
  if (model_.basis().size() > 0) {
    SubspaceSolver solver(lambda_, config_.eps, config_.max_iter);
    gamma = solver.solve(patch - model_.mu(), model_.basis(), false).gamma;
  }
  push_observation(patch, gamma);
  r.updated_model = maybe_update();

  particles_ = resample(particles_, scores.log_likelihoods, static_cast<std::size_t>(config_.n_particles), rng_);
  return r;
}

std::vector<TrackResult> track_sequence(const std::vector<Frame>& frames, const Box& initial,
                                        const TrackerConfig& config) {
  std::vector<TrackResult> out;
  if (frames.empty()) return out;
  Tracker tracker(config);
  out.reserve(frames.size());
  out.push_back(tracker.initialize(frames.front(), initial));
  for (std::size_t i = 1; i < frames.size(); ++i) out.push_back(tracker.step(frames[i]));
  return out;
}

}  // namespace igdts
