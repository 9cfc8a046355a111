#include "igdts/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "igdts/config.hpp"
#include "igdts/errors.hpp"
#include "igdts/evaluation.hpp"
#include "igdts/imaging_io.hpp"
#include "igdts/robust_regression.hpp"
#include "igdts/synthetic.hpp"
#include "igdts/tracker.hpp"

namespace fs = std::filesystem;

namespace igdts {

namespace {

// Input problems map to kExitBadInput.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw IoError(what + " not found: '" + p.string() + "'");
}

fs::path temp_sibling(const fs::path& p) {
  fs::path t = p;
  t += ".tmp";
  return t;
}

// Writes through a temporary sibling and renames it into place, so a failed
// command leaves no partial file behind.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  const fs::path tmp = temp_sibling(path);
  try {
    {
      std::ofstream out(tmp);
      if (!out) throw IoError("cannot write '" + path.string() + "'");
      body(out);
      out.flush();
      if (!out) throw IoError("write failed for '" + path.string() + "'");
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

// Same for a directory tree produced by `body` in a temporary sibling.
void write_atomic_dir(const fs::path& dir, const std::function<void(const fs::path&)>& body) {
  const fs::path tmp = temp_sibling(dir);
  std::error_code ec;
  fs::remove_all(tmp, ec);
  try {
    fs::create_directories(tmp);
    body(tmp);
    fs::remove_all(dir);
    fs::rename(tmp, dir);
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
}

std::string config_help() {
  std::ostringstream s;
  s << "Config file keys (key = value, '#' comments; file from --config or $" << kConfigEnvVar
    << "; --set key=value overrides):\n";
  for (const auto& k : config_keys()) {
    s << "  " << std::left << std::setw(18) << k.name << k.description << " [default " << k.default_value << "]";
    if (k.heuristic) s << " (heuristic default)";
    s << '\n';
  }
  s << "Exit status: 0 success, 1 tracking lost under lost_policy = halt, 2 bad input.\n";
  return s.str();
}

// ---- regress ------------------------------------------------------------

struct RegressArgs {
  std::string input, output;
  double lambda_max = 0.0;
  double lambda_min_ratio = 0.1;
  double eta = 0.0;
  double eps = 1e-8;
  int max_iter = 500;
  CLI::Option* eta_opt = nullptr;
};

int cmd_regress(const RegressArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.input, "input CSV");
  const RegressionCsv csv = read_regression_csv(a.input);
  if (!(a.lambda_max >= 0.0)) throw UsageError("--lambda-max must be >= 0");
  if (!(a.lambda_min_ratio >= 0.0 && a.lambda_min_ratio <= 1.0))
    throw UsageError("--lambda-min-ratio must lie in [0, 1]");
  if (a.lambda_max == 0.0)
    err << "warning: lambda_max = 0 is degenerate; gamma absorbs the entire residual\n";

  RegressionProblem prob;
  prob.X = csv.X;
  prob.y = csv.y;
  prob.lambda = LambdaSequence::linear(static_cast<std::size_t>(csv.y.size()), a.lambda_max,
                                       a.lambda_max * a.lambda_min_ratio);
  if (a.eta_opt && a.eta_opt->count() > 0) prob.eta = a.eta;
  prob.eps = a.eps;
  prob.max_iter = a.max_iter;
  const IgdtsSolution sol = igdts_fit(prob);

  write_atomic(a.output, [&](std::ostream& o) {
    o << "section,index,value\n";
    for (Eigen::Index j = 0; j < sol.beta.size(); ++j) o << "beta," << j + 1 << ',' << format_number(sol.beta[j]) << '\n';
    for (Eigen::Index i = 0; i < sol.gamma.size(); ++i)
      o << "gamma," << i + 1 << ',' << format_number(sol.gamma[i]) << '\n';
    for (std::size_t j = 0; j < sol.mse_trace.size(); ++j)
      o << "mse," << j << ',' << format_number(sol.mse_trace[j]) << '\n';
    for (std::size_t j = 0; j < sol.objective_trace.size(); ++j)
      o << "objective," << j << ',' << format_number(sol.objective_trace[j]) << '\n';
  });

  const char* stop = sol.stop == StopReason::kTolerance     ? "tolerance"
                     : sol.stop == StopReason::kMseIncrease ? "mse-increase"
                                                            : "max-iter";
  out << "iterations: " << sol.iterations << '\n';
  out << "final_mse: " << format_number(sol.mse_trace[static_cast<std::size_t>(sol.returned_iterate)]) << '\n';
  out << "objective: " << format_number(sol.objective) << '\n';
  out << "stop: " << stop << '\n';
  out << "beta:";
  for (Eigen::Index j = 0; j < sol.beta.size(); ++j) out << ' ' << format_number(sol.beta[j]);
  out << '\n';
  return kExitOk;
}

// ---- distance-demo ------------------------------------------------------

struct DistanceArgs {
  std::string templates;
  std::vector<std::string> candidates;
  bool synthetic = false;
  std::uint64_t seed = 0;
  std::vector<double> lambdas{0.01, 0.1};
  int side = 32;
};

bool is_image_name(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

Eigen::VectorXd vectorize(const Frame& f, int side) {
  const AffineState s = state_from_box({0.0, 0.0, static_cast<double>(f.width()), static_cast<double>(f.height())},
                                       side, side);
  return warp_patch(f, s, side);
}

int cmd_distance_demo(const DistanceArgs& a, std::ostream& out) {
  Eigen::MatrixXd X;
  std::vector<Eigen::VectorXd> cands;
  std::vector<std::string> names;
  if (a.synthetic) {
    const DistanceDemoSet set = make_distance_demo(a.seed, a.side);
    X = set.templates;
    cands = {set.clean, set.occluded};
    names = {"clean", "occluded"};
  } else {
    if (a.templates.empty() || a.candidates.empty())
      throw UsageError("distance-demo needs --templates and --candidates, or --synthetic");
    if (!fs::is_directory(a.templates)) throw IoError("template directory not found: '" + a.templates + "'");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.templates))
      if (e.is_regular_file() && is_image_name(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.size() < 2) throw UsageError("need at least 2 template images in '" + a.templates + "'");
    int w = -1, h = -1;
    auto load = [&](const fs::path& p) {
      require_file(p, "image");
      const Frame f = Frame::from_raster(read_image(p));
      if (w < 0) {
        w = f.width();
        h = f.height();
      } else if (f.width() != w || f.height() != h) {
        throw DimensionError("image '" + p.string() + "' is " + std::to_string(f.width()) + "x" +
                             std::to_string(f.height()) + ", expected " + std::to_string(w) + "x" + std::to_string(h));
      }
      return vectorize(f, a.side);
    };
    X.resize(static_cast<Eigen::Index>(a.side) * a.side, static_cast<Eigen::Index>(files.size()));
    for (std::size_t k = 0; k < files.size(); ++k) X.col(static_cast<Eigen::Index>(k)) = load(files[k]);
    for (const auto& c : a.candidates) {
      cands.push_back(load(c));
      names.push_back(fs::path(c).filename().string());
    }
  }

  const auto n = static_cast<std::size_t>(X.rows());
  std::size_t width = 12;
  for (const auto& nm : names) width = std::max(width, nm.size() + 2);
  for (double lam : a.lambdas) {
    if (!(lam >= 0.0)) throw UsageError("lambda values must be >= 0");
    const LambdaSequence seq = LambdaSequence::linear(n, lam, 0.1 * lam);
    out << "lambda_max = " << format_number(lam) << '\n';
    out << std::left << std::setw(10) << "distance";
    for (const auto& nm : names) out << std::right << std::setw(static_cast<int>(width)) << nm;
    out << '\n';
    const char* rows[] = {"d_OLS", "d_LAD", "d_LSS", "d_IGDTS"};
    for (int r = 0; r < 4; ++r) {
      out << std::left << std::setw(10) << rows[r];
      for (const auto& y : cands) {
        double v = 0.0;
        switch (r) {
          case 0: v = d_ols(y, X); break;
          case 1: v = d_lad(y, X); break;
          case 2: v = d_lss(y, X, lam); break;
          default: v = d_igdts(y, X, seq); break;
        }
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(4) << v;
        out << std::right << std::setw(static_cast<int>(width)) << cell.str();
      }
      out << '\n';
    }
    out << '\n';
  }
  return kExitOk;
}

// ---- track --------------------------------------------------------------

struct TrackArgs {
  std::string sequence, groundtruth, out_dir, pattern = "%04d.pgm";
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  bool overlays = false;
};

TrackerConfig resolve_tracker_config(const std::optional<std::string>& config_flag,
                                     const std::vector<std::string>& sets, const CLI::Option* seed_opt,
                                     std::uint64_t seed) {
  TrackerConfig cfg;
  std::optional<fs::path> flag;
  if (config_flag) flag = fs::path(*config_flag);
  if (const auto path = resolve_config_path(flag)) {
    require_file(*path, "config file");
    cfg = load_config(*path, cfg);
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (seed_opt && seed_opt->count() > 0) cfg.seed = seed;
  cfg.validate();
  return cfg;
}

int cmd_track(const TrackArgs& a, std::ostream& out, std::ostream& err) {
  const TrackerConfig cfg = resolve_tracker_config(a.config, a.sets, a.seed_opt, a.seed);
  const fs::path gt_path = a.groundtruth.empty() ? fs::path(a.sequence) / "groundtruth.txt" : fs::path(a.groundtruth);
  require_file(gt_path, "ground truth");
  const GroundTruth gt = parse_ground_truth(gt_path);
  const std::vector<Frame> frames = load_sequence(a.sequence, a.pattern);
  if (gt.boxes.size() < frames.size())
    throw IoError("ground truth '" + gt_path.string() + "' has no box for frame " +
                  std::to_string(gt.boxes.size() + 1) + " of " + std::to_string(frames.size()));

  const std::vector<TrackResult> results = track_sequence(frames, gt.boxes.front(), cfg);
  const SequenceReport report = summarize(results, gt);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_atomic(dir / "results.csv", [&](std::ostream& o) { write_results_csv(o, results); });
  write_atomic(dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, report); });
  write_atomic(dir / "summary.csv", [&](std::ostream& o) { write_summary(o, report); });
  if (a.overlays) {
    write_atomic_dir(dir / "overlays", [&](const fs::path& tmp) {
      for (std::size_t i = 0; i < frames.size(); ++i) {
        const ColoredBox boxes[] = {{gt.boxes[i], {0, 255, 0}}, {results[i].bbox, {255, 0, 0}}};
        char name[32];
        std::snprintf(name, sizeof(name), "%04zu.ppm", i + 1);
        write_overlay(frames[i], boxes, tmp / name);
      }
    });
  }
  out << "frames: " << results.size() << '\n';
  write_summary(out, report);
  return kExitOk;
}

// ---- synth-regression ---------------------------------------------------

struct SynthRegressionArgs {
  RegressionSpec spec;
  std::string output, truth;
};

int cmd_synth_regression(const SynthRegressionArgs& a, std::ostream& out) {
  const SyntheticRegression data = make_regression(a.spec);
  fs::path truth = a.truth;
  if (truth.empty()) {
    truth = fs::path(a.output);
    truth.replace_extension(".truth.csv");
  }
  // Stage both files, then rename.
  const fs::path tmp_data = temp_sibling(a.output), tmp_truth = temp_sibling(truth);
  try {
    write_regression_csv(tmp_data, data);
    write_regression_truth(tmp_truth, data);
    fs::rename(tmp_data, a.output);
    fs::rename(tmp_truth, truth);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp_data, ec);
    fs::remove(tmp_truth, ec);
    throw;
  }
  out << "wrote " << a.output << " and " << truth.string() << " (" << data.outliers.size() << " outliers)\n";
  return kExitOk;
}

// ---- synth-sequence -----------------------------------------------------

struct SynthSequenceArgs {
  SequenceSpec spec;
  std::string motion = "random-walk";
  std::string occlusion;
  std::string out_dir;
};

int cmd_synth_sequence(SynthSequenceArgs a, std::ostream& out) {
  if (a.motion == "static") a.spec.motion = MotionPreset::kStatic;
  else if (a.motion == "random-walk") a.spec.motion = MotionPreset::kRandomWalk;
  else throw UsageError("--motion must be static or random-walk");
  if (!a.occlusion.empty()) {
    int first = 0, last = 0;
    char sep = 0;
    std::istringstream s(a.occlusion);
    if (!(s >> first >> sep >> last) || sep != ':' || !s.eof())
      throw UsageError("--occlusion expects first:last, got '" + a.occlusion + "'");
    a.spec.occlusion_first = first;
    a.spec.occlusion_last = last;
  }
  a.spec.validate();
  const fs::path dir(a.out_dir);
  if (fs::exists(dir) && !(fs::is_directory(dir) && fs::is_empty(dir)))
    throw UsageError("output directory '" + a.out_dir + "' exists and is not empty");
  const SyntheticSequence seq = make_sequence(a.spec);
  write_atomic_dir(dir, [&](const fs::path& tmp) { write_sequence(tmp, seq); });
  out << "wrote " << seq.frames.size() << " frames to " << a.out_dir << '\n';
  return kExitOk;
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
  std::string results, groundtruth, output;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.results, "results CSV");
  require_file(a.groundtruth, "ground truth");
  const std::vector<Box> boxes = read_results_boxes(a.results);
  const GroundTruth gt = parse_ground_truth(a.groundtruth);
  const SequenceReport report = summarize(boxes, gt);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (!a.output.empty()) write_atomic(a.output, [&](std::ostream& o) { write_report_csv(o, report); });
  write_summary(out, report);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust regression and subspace tracking with sorted soft-threshold outlier selection", "igdts"};
  app.require_subcommand(1);
  const std::string footer = config_help();
  app.footer(footer);

  RegressArgs ra;
  auto* regress = app.add_subcommand("regress", "Fit y = X beta + outliers from a CSV with header y,x1..xp");
  regress->add_option("--input", ra.input, "Input CSV (header y,x1,...,xp)")->required();
  regress->add_option("--output", ra.output, "Output CSV of beta, gamma, MSE and objective traces")->required();
  regress->add_option("--lambda-max", ra.lambda_max, "Largest weight of the linear lambda sequence")->required();
  regress->add_option("--lambda-min-ratio", ra.lambda_min_ratio, "Smallest weight as a fraction of lambda-max")
      ->capture_default_str();
  ra.eta_opt = regress->add_option("--eta", ra.eta, "Gradient step (default 1/L, L = largest eigenvalue of X^T X)");
  regress->add_option("--eps", ra.eps, "Stopping tolerance on the MSE change")->capture_default_str();
  regress->add_option("--max-iter", ra.max_iter, "Iteration cap")->capture_default_str();
  regress->footer(footer);

  DistanceArgs da;
  auto* demo = app.add_subcommand("distance-demo", "Tabulate d_OLS, d_LAD, d_LSS, d_IGDTS for candidates against a template set");
  demo->add_option("--templates", da.templates, "Directory of template images (at least 2)");
  demo->add_option("--candidates", da.candidates, "Candidate image paths");
  demo->add_flag("--synthetic", da.synthetic, "Use a generated template set with a clean and an occluded candidate");
  demo->add_option("--seed", da.seed, "Seed for --synthetic")->capture_default_str();
  demo->add_option("--lambda", da.lambdas, "lambda_max values, one table each")->capture_default_str();
  demo->add_option("--side", da.side, "Patch side after resampling")->capture_default_str();
  demo->footer(footer);

  TrackArgs ta;
  auto* track = app.add_subcommand("track", "Track a target through an image sequence");
  track->add_option("--sequence", ta.sequence, "Directory of numbered frames")->required();
  track->add_option("--groundtruth", ta.groundtruth, "Ground-truth boxes (default <sequence>/groundtruth.txt); line 1 seeds the tracker");
  track->add_option("--pattern", ta.pattern, "printf-style frame name pattern")->capture_default_str();
  track->add_option("--config", ta.config, std::string("Config file (default $") + kConfigEnvVar + ")");
  track->add_option("--set", ta.sets, "Override one config key, key=value (repeatable)");
  ta.seed_opt = track->add_option("--seed", ta.seed, "Random seed (overrides the config)");
  track->add_option("--out", ta.out_dir, "Output directory for results.csv, report.csv, summary.csv")->required();
  track->add_flag("--overlays", ta.overlays, "Also write overlays/NNNN.ppm (truth green, track red)");
  track->footer(footer);

  SynthRegressionArgs sra;
  auto* sreg = app.add_subcommand("synth-regression", "Generate a regression CSV with planted outliers");
  sreg->add_option("--n", sra.spec.n, "Rows")->capture_default_str();
  sreg->add_option("--p", sra.spec.p, "Columns")->capture_default_str();
  sreg->add_option("--outlier-frac", sra.spec.outlier_frac, "Fraction of rows carrying an outlier, in [0, 1)")
      ->capture_default_str();
  sreg->add_option("--sigma-g", sra.spec.sigma_g, "Gaussian noise std dev")->capture_default_str();
  sreg->add_option("--sigma-l", sra.spec.sigma_l, "Laplacian outlier scale")->capture_default_str();
  sreg->add_option("--outlier-magnitude", sra.spec.outlier_magnitude,
                   "If > 0, outliers are +/- this value instead of Laplacian draws")
      ->capture_default_str();
  sreg->add_option("--seed", sra.spec.seed, "Random seed")->capture_default_str();
  sreg->add_option("--output", sra.output, "Output CSV")->required();
  sreg->add_option("--truth", sra.truth, "Sidecar truth file (default <output stem>.truth.csv)");
  sreg->footer(footer);

  SynthSequenceArgs ssa;
  auto* sseq = app.add_subcommand("synth-sequence", "Generate a synthetic tracking sequence as numbered PGM frames");
  sseq->add_option("--frames", ssa.spec.n_frames, "Number of frames")->capture_default_str();
  sseq->add_option("--width", ssa.spec.width, "Frame width")->capture_default_str();
  sseq->add_option("--height", ssa.spec.height, "Frame height")->capture_default_str();
  sseq->add_option("--target-size", ssa.spec.target_size, "Target side in pixels")->capture_default_str();
  sseq->add_option("--motion", ssa.motion, "static or random-walk")->capture_default_str();
  sseq->add_option("--step-sigma", ssa.spec.step_sigma, "Random-walk step std dev (px per frame)")
      ->capture_default_str();
  sseq->add_option("--occlusion", ssa.occlusion, "Occlusion window first:last (1-based, inclusive)");
  sseq->add_option("--occlusion-fraction", ssa.spec.occlusion_fraction, "Share of target columns covered")
      ->capture_default_str();
  sseq->add_option("--illumination-ramp", ssa.spec.illumination_ramp, "Total gain drop over the sequence, in [0, 1)")
      ->capture_default_str();
  sseq->add_option("--seed", ssa.spec.seed, "Random seed")->capture_default_str();
  sseq->add_option("--out", ssa.out_dir, "Output directory (must not exist or be empty)")->required();
  sseq->footer(footer);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Re-score a results CSV against ground truth");
  eval->add_option("--results", ea.results, "results.csv from track")->required();
  eval->add_option("--groundtruth", ea.groundtruth, "Ground-truth boxes")->required();
  eval->add_option("--output", ea.output, "Optional per-frame report CSV (frame,cle,overlap)");
  eval->footer(footer);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (regress->parsed()) return cmd_regress(ra, out, err);
    if (demo->parsed()) return cmd_distance_demo(da, out);
    if (track->parsed()) return cmd_track(ta, out, err);
    if (sreg->parsed()) return cmd_synth_regression(sra, out);
    if (sseq->parsed()) return cmd_synth_sequence(ssa, out);
    if (eval->parsed()) return cmd_eval(ea, out, err);
  } catch (const TrackingLostError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitBadInput;
}

}  // namespace igdts
