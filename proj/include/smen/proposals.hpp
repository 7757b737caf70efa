#pragma once

#include <vector>

#include "smen/tensorseq.hpp"

namespace smen {

/// Temporal detection in snippet indices, end exclusive.
struct Proposal {
  int class_id = 0;
  int start = 0;
  int end = 0;
  double confidence = 0.0;

  int length() const { return end - start; }
};

struct PostprocessConfig {
  std::vector<double> act_thresholds = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double nms_iou = 0.5;
  double class_threshold = 0.1;
  double outer_margin_ratio = 0.25;
  double topk_ratio = 0.125;  // video-score pooling for the class gate
};

/// Candidate proposals from a fused CAS + attention pair. For every action
/// class whose video-level score passes class_threshold, thresholds the
/// instance-suppressed track u_c(t) = attn_ins(t) * sigmoid(cas[t,c]) at each
/// activation threshold; each maximal run becomes a proposal whose confidence
/// is the outer-inner contrast (mean of u inside minus mean over the flanking
/// margins, 0 when the clamped margins are empty).
std::vector<Proposal> generate(const Cas& cas, const AttentionTriple& attn,
                               const PostprocessConfig& cfg);

/// Temporal intersection over union of [a_start,a_end) and [b_start,b_end).
double tiou(double a_start, double a_end, double b_start, double b_end);

/// Greedy class-wise NMS. Order: confidence descending, ties by earlier
/// start, then lower class id. A proposal survives iff its t-IoU with every
/// kept proposal of the same class is below iou_threshold.
std::vector<Proposal> nms(std::vector<Proposal> props, double iou_threshold);

}  // namespace smen
