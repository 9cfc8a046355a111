#include "igdts/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "igdts/errors.hpp"

namespace igdts {

double center_location_error(const Box& a, const Box& b) { return std::hypot(a.cx() - b.cx(), a.cy() - b.cy()); }

double overlap_rate(const Box& tracked, const Box& truth) {
  const double ix = std::max(0.0, std::min(tracked.x + tracked.w, truth.x + truth.w) - std::max(tracked.x, truth.x));
  const double iy = std::max(0.0, std::min(tracked.y + tracked.h, truth.y + truth.h) - std::max(tracked.y, truth.y));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  const double uni = tracked.area() + truth.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

SequenceReport summarize(const std::vector<Box>& tracked, const GroundTruth& gt) {
  if (tracked.empty()) throw DomainError("summarize: no tracked frames");
  if (gt.boxes.size() < tracked.size())
    throw DimensionError("summarize: ground truth has " + std::to_string(gt.boxes.size()) + " rows for " +
                         std::to_string(tracked.size()) + " tracked frames");
  SequenceReport rep;
  if (gt.boxes.size() > tracked.size())
    rep.warnings.push_back("ignoring " + std::to_string(gt.boxes.size() - tracked.size()) +
                           " extra ground-truth rows");
  rep.n_frames = tracked.size();
  rep.cle.reserve(rep.n_frames);
  rep.overlap.reserve(rep.n_frames);
  double sum_cle = 0.0, sum_ov = 0.0;
  for (std::size_t i = 0; i < rep.n_frames; ++i) {
    rep.cle.push_back(center_location_error(tracked[i], gt.boxes[i]));
    rep.overlap.push_back(overlap_rate(tracked[i], gt.boxes[i]));
    sum_cle += rep.cle.back();
    sum_ov += rep.overlap.back();
  }
  rep.mean_cle = sum_cle / static_cast<double>(rep.n_frames);
  rep.mean_overlap = sum_ov / static_cast<double>(rep.n_frames);
  return rep;
}

SequenceReport summarize(const std::vector<TrackResult>& results, const GroundTruth& gt) {
  std::vector<Box> boxes;
  boxes.reserve(results.size());
  for (const auto& r : results) boxes.push_back(r.bbox);
  return summarize(boxes, gt);
}

void write_report_csv(std::ostream& out, const SequenceReport& report) {
  out << "frame,cle,overlap\n";
  for (std::size_t i = 0; i < report.n_frames; ++i)
    out << i + 1 << ',' << format_number(report.cle[i]) << ',' << format_number(report.overlap[i]) << '\n';
}

void write_summary(std::ostream& out, const SequenceReport& report) {
  out << "mean_cle," << format_number(report.mean_cle) << '\n';
  out << "mean_overlap," << format_number(report.mean_overlap) << '\n';
}

void write_results_csv(std::ostream& out, const std::vector<TrackResult>& results) {
  out << "frame,x,y,w,h,tx,ty,theta,scale,aspect,skew,distance,log_likelihood,updated,lost\n";
  for (const auto& r : results) {
    out << r.frame_index << ',' << format_number(r.bbox.x) << ',' << format_number(r.bbox.y) << ','
        << format_number(r.bbox.w) << ',' << format_number(r.bbox.h);
    for (double v : r.state.as_array()) out << ',' << format_number(v);
    out << ',' << format_number(r.distance) << ',' << format_number(r.log_likelihood) << ','
        << (r.updated_model ? 1 : 0) << ',' << (r.lost ? 1 : 0) << '\n';
  }
}

std::vector<Box> read_results_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame,x,y,w,h", 0) != 0)
    throw IoError(path.string() + ":1: expected header starting with frame,x,y,w,h");
  std::vector<Box> boxes;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double v[5];
    for (double& x : v) {
      if (!std::getline(row, cell, ',')) throw IoError(path.string() + ":" + std::to_string(line_no) + ": too few columns");
      try {
        std::size_t used = 0;
        x = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<std::size_t>(v[0]) != boxes.size() + 1)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": frames must be numbered 1, 2, ...");
    boxes.push_back({v[1], v[2], v[3], v[4]});
  }
  return boxes;
}

}  // namespace igdts
