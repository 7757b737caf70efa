#include "smen/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smen/backbone.hpp"

namespace smen {

namespace {

double mean_over(const std::vector<double>& u, int lo, int hi) {
  double sum = 0.0;
  for (int t = lo; t < hi; ++t) sum += u[t];
  return sum / (hi - lo);
}

/// Inside mean minus the mean over the two flanking margins of width
/// floor(ratio * len), clamped to [0, T); an empty margin pair scores 0.
double contrast_confidence(const std::vector<double>& u, int start, int end, double ratio) {
  const int t_len = static_cast<int>(u.size());
  const double inner = mean_over(u, start, end);
  const int width = static_cast<int>(std::floor(ratio * (end - start)));
  const int left_lo = std::max(0, start - width);
  const int right_hi = std::min(t_len, end + width);
  double outer_sum = 0.0;
  int outer_count = 0;
  for (int t = left_lo; t < start; ++t, ++outer_count) outer_sum += u[t];
  for (int t = end; t < right_hi; ++t, ++outer_count) outer_sum += u[t];
  const double outer = outer_count > 0 ? outer_sum / outer_count : 0.0;
  return inner - outer;
}

}  // namespace

std::vector<Proposal> generate(const Cas& cas, const AttentionTriple& attn,
                               const PostprocessConfig& cfg) {
  const int t_len = cas.length();
  const int n_act = cas.num_classes();
  if (attn.length() != t_len)
    throw std::invalid_argument("generate: CAS/attention length mismatch");
  if (!std::is_sorted(cfg.act_thresholds.begin(), cfg.act_thresholds.end()))
    throw std::invalid_argument("generate: activation thresholds must be ascending");

  const Cas weighted = weighted_cas(cas, attn, Branch::kInstance);
  const std::vector<double> scores = video_scores(weighted, cfg.topk_ratio);

  std::vector<Proposal> props;
  std::vector<double> u(t_len);
  for (int c = 0; c < n_act; ++c) {
    if (scores[c] < cfg.class_threshold) continue;
    for (int t = 0; t < t_len; ++t)
      u[t] = attn.at(t, Branch::kInstance) * sigmoid(cas.logits(t, c));
    for (double theta_a : cfg.act_thresholds) {
      int t = 0;
      while (t < t_len) {
        if (u[t] < theta_a) {
          ++t;
          continue;
        }
        int end = t + 1;
        while (end < t_len && u[end] >= theta_a) ++end;
        props.push_back(Proposal{c, t, end,
                                 contrast_confidence(u, t, end, cfg.outer_margin_ratio)});
        t = end;
      }
    }
  }
  return props;
}

double tiou(double a_start, double a_end, double b_start, double b_end) {
  const double inter = std::min(a_end, b_end) - std::max(a_start, b_start);
  if (inter <= 0.0) return 0.0;
  const double uni = (a_end - a_start) + (b_end - b_start) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Proposal> nms(std::vector<Proposal> props, double iou_threshold) {
  std::sort(props.begin(), props.end(), [](const Proposal& a, const Proposal& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.start != b.start) return a.start < b.start;
    return a.class_id < b.class_id;
  });
  std::vector<Proposal> kept;
  for (const Proposal& p : props) {
    bool suppressed = false;
    for (const Proposal& k : kept) {
      if (k.class_id != p.class_id) continue;
      if (tiou(p.start, p.end, k.start, k.end) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

}  // namespace smen
