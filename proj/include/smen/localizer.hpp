#pragma once

#include <map>
#include <string>
#include <vector>

#include "smen/backbone.hpp"
#include "smen/losses.hpp"
#include "smen/mining.hpp"
#include "smen/trainer.hpp"

namespace smen {

/// Two localization branches: N trained on original features, S on
/// mask-filtered features. Both share (d, h, C).
struct LocalizerState {
  BackboneParams n_params;
  BackboneParams s_params;
  LossWeights loss_weights;
};

/// Elementwise maximum; shapes must match.
Cas fuse(const Cas& a, const Cas& b);
AttentionTriple fuse(const AttentionTriple& a, const AttentionTriple& b);

enum class InferMode { kFull, kNOnly, kSOnly, kCombo };

InferMode parse_infer_mode(const std::string& name);
std::string infer_mode_name(InferMode mode);

struct InferResult {
  Cas cas;
  AttentionTriple attn;
};

/// Run both branches on the unmasked input and fuse by elementwise max.
/// Fused attention rows are not simplex rows in general.
InferResult infer(const LocalizerState& state, const FeatureSequence& x);

/// Ablation taps: n_only / s_only return one branch verbatim, combo pairs
/// the N-branch CAS with the S-branch attention, full equals infer.
InferResult infer_combo(const LocalizerState& state, const FeatureSequence& x,
                        InferMode mode);

/// Drives both branches with separate Adam states. The per-branch losses are
/// independent except for the feature-separation terms, which combine as
/// (1 - beta) * normal + beta * slow; the split scales each branch's
/// separation gradient accordingly.
class LocalizerTrainer {
 public:
  LocalizerTrainer(LocalizerState init, TrainConfig cfg);

  /// One update from a single video; returns the combined loss.
  double train_step(const FeatureSequence& x, const VideoLabel& label, const SlowMask& mask);

  /// Batched loop over the corpus, sampling like train(); every video id
  /// must have a mask. Returns the per-iteration mean loss curve.
  std::vector<double> train(const Corpus& corpus,
                            const std::map<std::string, std::vector<int>>& masks);

  const LocalizerState& state() const { return state_; }

 private:
  /// Combined loss and per-branch gradients for one video; shared by
  /// train_step and the batched loop.
  double accumulate_gradients(const FeatureSequence& x, const VideoLabel& label,
                              const SlowMask& mask, BackboneParams& n_grad,
                              BackboneParams& s_grad) const;

  LocalizerState state_;
  TrainConfig cfg_;
  AdamState n_adam_;
  AdamState s_adam_;
};

/// Checkpoint directory: n_branch.ckpt, s_branch.ckpt, weights.cfg.
void save_localizer(const std::string& dir, const LocalizerState& state);
LocalizerState load_localizer(const std::string& dir);

}  // namespace smen
