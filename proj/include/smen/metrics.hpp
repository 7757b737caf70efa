#pragma once

#include <string>
#include <vector>

#include "smen/proposals.hpp"

namespace smen {

struct GroundTruthSegment {
  std::string video_id;
  int class_id = 0;
  double start_sec = 0.0;
  double end_sec = 0.0;
  bool slow_motion = false;
};

/// A proposal tagged with the video it belongs to, in seconds (the unit the
/// evaluation runs in).
struct ScoredDetection {
  std::string video_id;
  int class_id = 0;
  double start_sec = 0.0;
  double end_sec = 0.0;
  double confidence = 0.0;
};

/// Average precision for one class at a t-IoU threshold. Proposals are
/// matched greedily in confidence order (ties: video id, then start, as in
/// NMS); each ground truth can absorb at most one detection. AP sums
/// precision at each true-positive rank divided by the ground-truth count.
/// Returns 0 when the class has no ground truth.
double average_precision(std::vector<ScoredDetection> dets,
                         const std::vector<GroundTruthSegment>& gts, double iou_t);

/// Mean AP over all classes with at least one ground truth segment.
double map_at(const std::vector<ScoredDetection>& dets,
              const std::vector<GroundTruthSegment>& gts, double iou_t);

struct BandSpec {
  std::string name;
  std::vector<double> thresholds;
};

struct MapReport {
  std::vector<std::pair<double, double>> grid;  // (threshold, mAP)
  std::vector<std::pair<std::string, double>> band_averages;
};

std::vector<BandSpec> default_bands();
BandSpec thumos_band();  // 0.1:0.1:0.7
BandSpec anet_band();    // 0.5:0.05:0.95

MapReport map_bands(const std::vector<ScoredDetection>& dets,
                    const std::vector<GroundTruthSegment>& gts,
                    const std::vector<BandSpec>& bands = default_bands());

/// Keep only segments flagged as slow motion.
std::vector<GroundTruthSegment> slow_subset_filter(const std::vector<GroundTruthSegment>& gts);

std::string format_map_table(const MapReport& report);

}  // namespace smen
