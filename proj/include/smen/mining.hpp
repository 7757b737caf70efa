#pragma once

#include <vector>

#include "smen/backbone.hpp"
#include "smen/tensorseq.hpp"

namespace smen {

struct MiningConfig {
  int tau = 4;         // sub-sampling stride
  double theta = 0.4;  // binarization threshold
  double s = 0.3;      // smoothing scale
  bool smooth_enabled = true;
};

/// Binary snippet mask; 1 marks snippets kept as slow-motion evidence.
struct SlowMask {
  std::vector<int> bits;

  int length() const { return static_cast<int>(bits.size()); }
};

/// Keep the first snippet of every group of tau: row i of the output is row
/// i*tau of the input, output length floor(T/tau).
FeatureSequence subsample(const FeatureSequence& x, int tau);

/// Per-snippet maximum over the action-class columns; the background column
/// is excluded.
std::vector<double> activation_track(const Cas& cas);

/// Raise normalized activations to the power alpha = 1 - s * c_v, where c_v
/// is the population coefficient of variation, alpha clamped to [0.05, 1].
/// Disabled smoothing or a zero-mean track returns the input unchanged.
std::vector<double> smooth_activations(const std::vector<double>& m_norm, double s,
                                       bool smooth_enabled);

/// 1 where the value is >= theta (boundary inclusive), else 0.
std::vector<int> binarize(const std::vector<double>& m_smooth, double theta);

/// Nearest-neighbor upsample to length t_out using bin centers:
/// source index = min(floor((j + 0.5) * L / t_out), L - 1).
SlowMask upsample_mask(const std::vector<int>& mask, int t_out);

/// Zero every feature row whose mask bit is 0.
FeatureSequence apply_mask(const FeatureSequence& x, const SlowMask& mask);

/// Full mining pipeline: subsample, frozen forward, max-over-classes track,
/// min-max normalize, smooth, binarize, upsample back to the input length.
SlowMask generate_mask(const BackboneParams& miner_params, const FeatureSequence& x,
                       const MiningConfig& cfg);

}  // namespace smen
