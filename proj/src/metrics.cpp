#include "smen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace smen {

namespace {

/// Centi-unit stepping keeps a threshold bitwise identical across bands that
/// share it, so grid lookups never fall to float drift.
std::vector<double> centi_range(int lo, int hi, int step) {
  std::vector<double> out;
  for (int v = lo; v <= hi; v += step) out.push_back(v / 100.0);
  return out;
}

void sort_by_confidence(std::vector<ScoredDetection>& dets) {
  std::sort(dets.begin(), dets.end(), [](const ScoredDetection& a, const ScoredDetection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.video_id != b.video_id) return a.video_id < b.video_id;
    return a.start_sec < b.start_sec;
  });
}

}  // namespace

double average_precision(std::vector<ScoredDetection> dets,
                         const std::vector<GroundTruthSegment>& gts, double iou_t) {
  if (gts.empty()) return 0.0;
  sort_by_confidence(dets);
  std::vector<bool> matched(gts.size(), false);
  const double num_gts = static_cast<double>(gts.size());
  double ap = 0.0;
  int tp = 0;
  for (std::size_t rank = 0; rank < dets.size(); ++rank) {
    const ScoredDetection& d = dets[rank];
    double best = -1.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (matched[g] || gts[g].video_id != d.video_id) continue;
      const double overlap = tiou(d.start_sec, d.end_sec, gts[g].start_sec, gts[g].end_sec);
      if (overlap > best) {
        best = overlap;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best >= iou_t) {
      matched[best_gt] = true;
      ++tp;
      ap += (static_cast<double>(tp) / static_cast<double>(rank + 1)) / num_gts;
    }
  }
  return ap;
}

double map_at(const std::vector<ScoredDetection>& dets,
              const std::vector<GroundTruthSegment>& gts, double iou_t) {
  std::set<int> classes;
  for (const GroundTruthSegment& g : gts) classes.insert(g.class_id);
  if (classes.empty()) return 0.0;
  double sum = 0.0;
  for (int c : classes) {
    std::vector<ScoredDetection> class_dets;
    for (const ScoredDetection& d : dets)
      if (d.class_id == c) class_dets.push_back(d);
    std::vector<GroundTruthSegment> class_gts;
    for (const GroundTruthSegment& g : gts)
      if (g.class_id == c) class_gts.push_back(g);
    sum += average_precision(std::move(class_dets), class_gts, iou_t);
  }
  return sum / static_cast<double>(classes.size());
}

BandSpec thumos_band() { return BandSpec{"0.1:0.7", centi_range(10, 70, 10)}; }
BandSpec anet_band() { return BandSpec{"0.5:0.95", centi_range(50, 95, 5)}; }

std::vector<BandSpec> default_bands() {
  return {thumos_band(),
          BandSpec{"0.3:0.7", centi_range(30, 70, 10)},
          BandSpec{"0.1:0.5", centi_range(10, 50, 10)},
          anet_band()};
}

MapReport map_bands(const std::vector<ScoredDetection>& dets,
                    const std::vector<GroundTruthSegment>& gts,
                    const std::vector<BandSpec>& bands) {
  std::set<double> thresholds;
  for (const BandSpec& band : bands)
    thresholds.insert(band.thresholds.begin(), band.thresholds.end());
  MapReport report;
  for (double t : thresholds) report.grid.emplace_back(t, map_at(dets, gts, t));
  auto lookup = [&](double t) {
    for (const auto& [thr, value] : report.grid)
      if (thr == t) return value;
    return 0.0;
  };
  for (const BandSpec& band : bands) {
    double sum = 0.0;
    for (double t : band.thresholds) sum += lookup(t);
    report.band_averages.emplace_back(band.name,
                                      sum / static_cast<double>(band.thresholds.size()));
  }
  return report;
}

std::vector<GroundTruthSegment> slow_subset_filter(const std::vector<GroundTruthSegment>& gts) {
  std::vector<GroundTruthSegment> out;
  for (const GroundTruthSegment& g : gts)
    if (g.slow_motion) out.push_back(g);
  return out;
}

std::string format_map_table(const MapReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "t-IoU    mAP\n";
  for (const auto& [thr, value] : report.grid) os << thr << "   " << value << "\n";
  os << "\nband averages\n";
  for (const auto& [name, value] : report.band_averages)
    os << name << "   " << value << "\n";
  return os.str();
}

}  // namespace smen
