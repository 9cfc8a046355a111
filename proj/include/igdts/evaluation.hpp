#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "igdts/box.hpp"
#include "igdts/imaging_io.hpp"
#include "igdts/tracker.hpp"

namespace igdts {

// Euclidean distance between box centres.
double center_location_error(const Box& a, const Box& b);

// Intersection over union; 0 for disjoint boxes.
double overlap_rate(const Box& tracked, const Box& truth);

struct SequenceReport {
  std::vector<double> cle;
  std::vector<double> overlap;
  double mean_cle = 0.0;
  double mean_overlap = 0.0;
  std::size_t n_frames = 0;
  std::vector<std::string> warnings;
};

// Frame i of `tracked` is scored against gt.boxes[i]; the first frame
// counts. Extra ground-truth rows are ignored with a warning, fewer rows
// than tracked frames is a DimensionError.
SequenceReport summarize(const std::vector<Box>& tracked, const GroundTruth& gt);
SequenceReport summarize(const std::vector<TrackResult>& results, const GroundTruth& gt);

// "frame,cle,overlap" rows followed by nothing else.
void write_report_csv(std::ostream& out, const SequenceReport& report);
// "mean_cle,<v>" and "mean_overlap,<v>".
void write_summary(std::ostream& out, const SequenceReport& report);

// Per-frame tracker output: frame,x,y,w,h,tx,ty,theta,scale,aspect,skew,distance,log_likelihood,updated,lost
void write_results_csv(std::ostream& out, const std::vector<TrackResult>& results);
// Reads the boxes back from a results CSV (only frame,x,y,w,h are required).
std::vector<Box> read_results_boxes(const std::filesystem::path& path);

}  // namespace igdts
