#pragma once

#include <cstdint>
#include <string>

#include "smen/tensorseq.hpp"

namespace smen {

/// Weights of the reference CAS-generation network: a temporal mean window
/// followed by one hidden layer feeding a classification head (C+1 logits)
/// and a three-way attention head (instance / context / background).
struct BackboneParams {
  Matrix embed_w;              // d x h
  std::vector<double> embed_b; // h
  Matrix cls_w;                // h x (C+1)
  std::vector<double> cls_b;   // C+1
  Matrix attn_w;               // h x 3
  std::vector<double> attn_b;  // 3
  int context_radius = 1;

  int input_dim() const { return embed_w.rows(); }
  int hidden_dim() const { return embed_w.cols(); }
  int num_classes() const { return cls_w.cols() - 1; }

  static BackboneParams zeros_like(const BackboneParams& p);
};

/// Visit every parameter tensor in a fixed order (shared by the optimizer,
/// checkpointing and the gradient checker).
template <typename P, typename F>
void for_each_tensor(P&& params, F&& fn) {
  fn(params.embed_w.data());
  fn(params.embed_b);
  fn(params.cls_w.data());
  fn(params.cls_b);
  fn(params.attn_w.data());
  fn(params.attn_b);
}

inline std::vector<std::vector<double>*> tensor_ptrs(BackboneParams& p) {
  std::vector<std::vector<double>*> out;
  for_each_tensor(p, [&](std::vector<double>& t) { out.push_back(&t); });
  return out;
}

inline std::vector<const std::vector<double>*> tensor_ptrs(const BackboneParams& p) {
  std::vector<const std::vector<double>*> out;
  for_each_tensor(p, [&](const std::vector<double>& t) { out.push_back(&t); });
  return out;
}

std::size_t param_count(const BackboneParams& p);

struct BackboneOutput {
  Cas cas;
  AttentionTriple attn;
  Matrix embedded;  // T x h, kept for the feature separation loss
};

/// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases,
/// deterministic per seed.
BackboneParams init_params(int input_dim, int hidden_dim, int num_classes,
                           int context_radius, std::uint64_t seed);

BackboneOutput forward(const BackboneParams& params, const FeatureSequence& x);

/// Mean of rows t-radius..t+radius with the window clamped at the sequence
/// borders. The first stage of forward(); the loss gradients re-derive it.
Matrix temporal_window_mean(const Matrix& x, int radius);

/// Pool size used by video_scores: max(1, floor(T * topk_ratio)).
int topk_count(int t_len, double topk_ratio);

/// Scale each CAS row by the chosen attention branch weight.
Cas weighted_cas(const Cas& cas, const AttentionTriple& attn, Branch branch);

/// Video-level class probabilities: per-class top-k mean over time
/// (k = max(1, floor(T * topk_ratio))) followed by a softmax.
std::vector<double> video_scores(const Cas& cas_branch, double topk_ratio);

/// Checkpoint format: magic "SMENPRM1", dims (d,h,C,r) as little-endian
/// 32-bit ints, then each tensor row-major as 64-bit reals.
void save_params(const std::string& path, const BackboneParams& params);
BackboneParams load_params(const std::string& path);

}  // namespace smen
