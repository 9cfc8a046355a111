#include "igdts/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "igdts/errors.hpp"
#include "igdts/rng.hpp"

namespace igdts {

namespace {

// Fisher-Yates on indices with our own draws, so the choice is portable
// across standard libraries.
std::vector<int> choose_rows(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + std::min(n - i - 1, static_cast<int>(rng.uniform() * (n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

}  // namespace

void RegressionSpec::validate() const {
  if (n < 1 || p < 1) throw DomainError("regression: n and p must be at least 1");
  if (!(outlier_frac >= 0.0 && outlier_frac < 1.0)) throw DomainError("regression: outlier_frac must lie in [0, 1)");
  if (!(sigma_g >= 0.0) || !(sigma_l > 0.0)) throw DomainError("regression: sigma_g >= 0 and sigma_l > 0 required");
  if (!(outlier_magnitude >= 0.0)) throw DomainError("regression: outlier_magnitude must be >= 0");
}

SyntheticRegression make_regression(const RegressionSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticRegression d;
  d.X.resize(spec.n, spec.p);
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.p; ++j) d.X(i, j) = rng.normal();
  d.beta.resize(spec.p);
  for (int j = 0; j < spec.p; ++j) d.beta[j] = rng.normal();
  Eigen::VectorXd omega(spec.n);
  for (int i = 0; i < spec.n; ++i) omega[i] = spec.sigma_g * rng.normal();

  const int k = static_cast<int>(std::lround(spec.outlier_frac * spec.n));
  d.outliers = choose_rows(spec.n, k, rng);
  d.gamma = Eigen::VectorXd::Zero(spec.n);
  for (int i : d.outliers) {
    if (spec.outlier_magnitude > 0.0) {
      d.gamma[i] = rng.uniform() < 0.5 ? -spec.outlier_magnitude : spec.outlier_magnitude;
    } else {
      d.gamma[i] = rng.laplacian(spec.sigma_l);
    }
  }
  d.y = d.X * d.beta + omega + d.gamma;
  return d;
}

void write_regression_csv(const std::filesystem::path& path, const SyntheticRegression& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << 'y';
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    out << format_number(data.y[i]);
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << ',' << format_number(data.X(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_regression_truth(const std::filesystem::path& path, const SyntheticRegression& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "beta";
  for (Eigen::Index j = 0; j < data.beta.size(); ++j) out << ',' << format_number(data.beta[j]);
  out << "\noutliers";
  for (int i : data.outliers) out << ',' << i + 1;
  out << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

RegressionCsv read_regression_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "y")
    throw IoError(path.string() + ":1: header must be y,x1,...,xp");
  for (std::size_t j = 1; j < header.size(); ++j)
    if (header[j] != "x" + std::to_string(j)) throw IoError(path.string() + ":1: header must be y,x1,...,xp");
  const std::size_t p = header.size() - 1;

  std::vector<double> values;
  int line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() || !std::isfinite(v)) throw std::invalid_argument(cell);
        values.push_back(v);
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      ++count;
    }
    if (count != p + 1)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(p + 1) +
                    " columns, got " + std::to_string(count));
    ++rows;
  }
  if (rows == 0) throw IoError(path.string() + ": no data rows");
  RegressionCsv csv;
  csv.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  csv.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    csv.y[i] = values[i * (p + 1)];
    for (std::size_t j = 0; j < p; ++j) csv.X(i, j) = values[i * (p + 1) + j + 1];
  }
  return csv;
}

ValueNoise::ValueNoise(std::uint64_t seed, int width, int height, double cell, double lo, double hi)
    : gw_(static_cast<int>(std::ceil(width / cell)) + 2), gh_(static_cast<int>(std::ceil(height / cell)) + 2),
      cell_(cell) {
  if (!(cell > 0.0)) throw DomainError("ValueNoise: cell must be positive");
  Rng rng(seed);
  lattice_.resize(static_cast<std::size_t>(gw_) * gh_);
  for (double& v : lattice_) v = lo + (hi - lo) * rng.uniform();
}

double ValueNoise::operator()(double x, double y) const {
  const double gx = std::clamp(x / cell_, 0.0, gw_ - 1.000001);
  const double gy = std::clamp(y / cell_, 0.0, gh_ - 1.000001);
  const int ix = static_cast<int>(gx);
  const int iy = static_cast<int>(gy);
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double fx = smooth(gx - ix);
  const double fy = smooth(gy - iy);
  auto at = [&](int cx, int cy) { return lattice_[static_cast<std::size_t>(cy) * gw_ + cx]; };
  const double top = at(ix, iy) + fx * (at(ix + 1, iy) - at(ix, iy));
  const double bottom = at(ix, iy + 1) + fx * (at(ix + 1, iy + 1) - at(ix, iy + 1));
  return top + fy * (bottom - top);
}

void SequenceSpec::validate() const {
  if (n_frames < 1) throw DomainError("sequence: n_frames must be at least 1");
  if (target_size < 2 || target_size + 4 > std::min(width, height))
    throw DomainError("sequence: target_size must fit inside the frame with a margin");
  if (occlusion_first != 0 || occlusion_last != 0) {
    if (occlusion_first < 1 || occlusion_last < occlusion_first || occlusion_last > n_frames)
      throw DomainError("sequence: occlusion window must lie within [1, n_frames]");
  }
  if (!(occlusion_fraction > 0.0 && occlusion_fraction <= 1.0))
    throw DomainError("sequence: occlusion_fraction must lie in (0, 1]");
  if (!(illumination_ramp >= 0.0 && illumination_ramp < 1.0))
    throw DomainError("sequence: illumination_ramp must lie in [0, 1)");
  if (!(step_sigma >= 0.0)) throw DomainError("sequence: step_sigma must be >= 0");
}

SyntheticSequence make_sequence(const SequenceSpec& spec) {
  spec.validate();
  const int W = spec.width, H = spec.height, S = spec.target_size;
  const ValueNoise background(spec.seed * 4 + 1, W, H, 12.0, 0.25, 0.75);
  const ValueNoise target(spec.seed * 4 + 2, S, S, 4.0, 0.0, 1.0);
  const ValueNoise occluder(spec.seed * 4 + 3, S, S, 2.0, 0.3, 0.7);
  Rng rng = Rng(spec.seed).split(7);

  const int occ_cols = static_cast<int>(std::ceil(spec.occlusion_fraction * S));
  const double margin = 4.0 + 0.5 * S;
  double cx = 0.5 * W, cy = 0.5 * H;
  auto reflect = [](double v, double lo, double hi) {
    if (v < lo) v = 2 * lo - v;
    if (v > hi) v = 2 * hi - v;
    return std::clamp(v, lo, hi);
  };

  SyntheticSequence seq;
  for (int t = 1; t <= spec.n_frames; ++t) {
    if (t > 1 && spec.motion == MotionPreset::kRandomWalk) {
      cx = reflect(cx + spec.step_sigma * rng.normal(), margin, W - margin);
      cy = reflect(cy + spec.step_sigma * rng.normal(), margin, H - margin);
    }
    const int bx = static_cast<int>(std::lround(cx - 0.5 * S));
    const int by = static_cast<int>(std::lround(cy - 0.5 * S));
    const Box box{static_cast<double>(bx), static_cast<double>(by), static_cast<double>(S), static_cast<double>(S)};
    const bool occluded = spec.occlusion_first > 0 && t >= spec.occlusion_first && t <= spec.occlusion_last;
    const Box occ = occluded ? Box{box.x, box.y, static_cast<double>(occ_cols), box.h} : Box{};
    const double gain =
        spec.n_frames > 1 ? 1.0 - spec.illumination_ramp * (t - 1) / static_cast<double>(spec.n_frames - 1) : 1.0;

    std::vector<float> px(static_cast<std::size_t>(W) * H);
    for (int r = 0; r < H; ++r) {
      for (int c = 0; c < W; ++c) {
        double v = background(c + 0.5, r + 0.5);
        const int u = c - bx, w = r - by;
        if (u >= 0 && u < S && w >= 0 && w < S) {
          v = (occluded && u < occ_cols) ? occluder(u + 0.5, w + 0.5) : target(u + 0.5, w + 0.5);
        }
        px[static_cast<std::size_t>(r) * W + c] = static_cast<float>(quantize8(gain * v));
      }
    }
    seq.frames.emplace_back(W, H, std::move(px));
    seq.truth.boxes.push_back(box);
    seq.occluders.push_back(occ);
  }
  return seq;
}

void write_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu.pgm", i + 1);
    write_image(dir / name, seq.frames[i].to_raster());
  }
  write_ground_truth(dir / "groundtruth.txt", seq.truth);
}

DistanceDemoSet make_distance_demo(std::uint64_t seed, int side, int n_templates) {
  if (side < 8 || n_templates < 2) throw DomainError("distance demo: need side >= 8 and at least 2 templates");
  const int pad = 8;
  const ValueNoise object(seed * 3 + 1, side + 2 * pad, side + 2 * pad, 4.0, 0.05, 0.95);
  Rng rng = Rng(seed).split(11);
  const Eigen::Index d = static_cast<Eigen::Index>(side) * side;

  auto view = [&](double gain, int dx, int dy, double noise) {
    Eigen::VectorXd v(d);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        v[static_cast<Eigen::Index>(r) * side + c] =
            std::clamp(gain * object(c + pad + dx + 0.5, r + pad + dy + 0.5) + noise * rng.normal(), 0.0, 1.0);
    return v;
  };

  DistanceDemoSet set;
  set.side = side;
  set.templates.resize(d, n_templates);
  for (int k = 0; k < n_templates; ++k) set.templates.col(k) = view(0.9 + 0.2 * k / (n_templates - 1), 0, 0, 0.01);
  set.clean = view(1.02, 0, 0, 0.01);
  set.occluded = view(1.0, 3, 2, 0.01);
  // Dark block over the left 40% of the patch.
  const int cols = static_cast<int>(std::ceil(0.4 * side));
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < cols; ++c) set.occluded[static_cast<Eigen::Index>(r) * side + c] = 0.05;
  return set;
}

}  // namespace igdts
