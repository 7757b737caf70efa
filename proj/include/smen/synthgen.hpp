#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smen/dataio.hpp"
#include "smen/metrics.hpp"
#include "smen/tensorseq.hpp"

namespace smen {

struct SynthConfig {
  int num_videos = 40;
  int num_classes = 4;
  int dim = 16;
  int min_t = 50;
  int max_t = 100;
  double slow_fraction = 0.4;
  int stretch_factor = 4;      // slow instances are stretched by this factor
  double slow_amplitude = 0.4; // feature magnitude of slow instances vs normal
  double context_fraction = 0.5;
  double context_amplitude = 0.35;
  double noise_sigma = 0.25;
  double snippet_seconds = 16.0 / 25.0;
  std::uint64_t seed = 0;
};

struct SynthVideo {
  std::string id;
  FeatureSequence features;
  VideoLabel label;
  std::vector<GroundTruthSegment> gts;
};

/// Class-specific smooth trajectory: per dimension a sum of class-keyed
/// sinusoids sampled at unit snippet rate, normalized to zero mean and unit
/// variance per dimension. Same arguments give the identical matrix.
Matrix class_motif(int class_id, int length, int d, std::uint64_t seed);

/// Linear interpolation along time: output row i samples the motif at
/// i / factor (clamped at the last row), so consecutive-row deltas shrink by
/// the factor and sub-sampling at the same factor recovers the input rows.
Matrix stretch(const Matrix& motif, int factor);

/// Deterministic corpus: 1-3 planted action instances per video (slow ones
/// stretched, attenuated to slow_amplitude, and flagged), optional
/// low-amplitude context segments adjacent to actions, Gaussian noise
/// everywhere else.
std::vector<SynthVideo> generate(const SynthConfig& cfg);

/// Package generated videos in the persistence-layer corpus type.
Corpus make_corpus(const SynthConfig& cfg, const std::vector<SynthVideo>& videos);

}  // namespace smen
