#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "smen/backbone.hpp"
#include "smen/dataio.hpp"
#include "smen/losses.hpp"

namespace smen {

/// Training diverged (non-finite loss or parameters). Mapped to its own CLI
/// exit code so scripted callers can tell it apart from data errors.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double learning_rate = 5e-5;
  int iterations = 500;
  int batch_size = 8;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double topk_ratio = 0.125;
};

/// First/second moment estimates plus the shared step counter.
struct AdamState {
  BackboneParams m;
  BackboneParams v;
  long step = 0;

  static AdamState zeros_like(const BackboneParams& p);
};

/// Standard Adam update with bias correction, applied tensor by tensor in
/// the fixed for_each_tensor order.
void adam_step(BackboneParams& params, const BackboneParams& grads, AdamState& state,
               const TrainConfig& cfg);

struct TrainResult {
  BackboneParams params;
  std::vector<double> loss_curve;  // batch mean loss per iteration
};

/// Batched single-network training. Batches are whole videos sampled with
/// replacement from a seeded stream; gradients are averaged in batch order so
/// runs reproduce bit-exactly. If mask_source is given, each video's features
/// are masked before the forward pass (missing ids are an error).
TrainResult train(const BackboneParams& init, const Corpus& corpus,
                  const LossWeights& weights, const TrainConfig& cfg,
                  const std::map<std::string, std::vector<int>>* mask_source = nullptr);

/// Write a run directory: params.ckpt, loss.csv and config.cfg.
void write_train_run(const std::string& dir, const BackboneParams& params,
                     const std::vector<double>& loss_curve,
                     const std::map<std::string, std::string>& config_kv);

}  // namespace smen
