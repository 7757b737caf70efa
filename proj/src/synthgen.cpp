#include "smen/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace smen {

namespace {

constexpr std::uint64_t kMotifStream = 0x6d6f746966ULL;
constexpr std::uint64_t kVideoStream = 0x766964656fULL;

constexpr int kMotifComponents = 2;
constexpr int kMinInstanceLen = 6;
constexpr int kMaxInstanceLen = 10;
constexpr int kMinGap = 2;
constexpr int kMaxGap = 7;
constexpr int kMinContextLen = 3;
constexpr int kMaxContextLen = 6;
constexpr int kTailReserve = 2;  // background kept after the last planted segment

struct Placement {
  int start;
  int length;
};

}  // namespace

Matrix class_motif(int class_id, int length, int d, std::uint64_t seed) {
  if (length < 2) throw std::invalid_argument("class_motif: length must be >= 2");
  if (d < 1) throw std::invalid_argument("class_motif: dimension must be >= 1");
  Rng rng(Rng::mix(Rng::mix(seed, kMotifStream), static_cast<std::uint64_t>(class_id)));
  Matrix out(length, d);
  for (int j = 0; j < d; ++j) {
    double amp[kMotifComponents], freq[kMotifComponents], phase[kMotifComponents];
    for (int k = 0; k < kMotifComponents; ++k) {
      amp[k] = rng.uniform(0.5, 1.0);
      freq[k] = rng.uniform(0.08, 0.25);  // cycles per snippet
      phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    double mean = 0.0;
    for (int t = 0; t < length; ++t) {
      double v = 0.0;
      for (int k = 0; k < kMotifComponents; ++k)
        v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * t + phase[k]);
      out(t, j) = v;
      mean += v;
    }
    mean /= length;
    double var = 0.0;
    for (int t = 0; t < length; ++t) var += (out(t, j) - mean) * (out(t, j) - mean);
    var /= length;
    const double sd = std::sqrt(var);
    for (int t = 0; t < length; ++t)
      out(t, j) = sd > 1e-12 ? (out(t, j) - mean) / sd : 0.0;
  }
  return out;
}

Matrix stretch(const Matrix& motif, int factor) {
  if (factor < 1) throw std::invalid_argument("stretch: factor must be >= 1");
  if (motif.rows() < 1) throw std::invalid_argument("stretch: empty motif");
  const int out_len = motif.rows() * factor;
  Matrix out(out_len, motif.cols());
  for (int i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) / factor;
    const int lo = std::min(static_cast<int>(pos), motif.rows() - 1);
    const int hi = std::min(lo + 1, motif.rows() - 1);
    const double frac = pos - lo;
    for (int j = 0; j < motif.cols(); ++j)
      out(i, j) = (1.0 - frac) * motif(lo, j) + frac * motif(hi, j);
  }
  return out;
}

std::vector<SynthVideo> generate(const SynthConfig& cfg) {
  if (cfg.num_videos < 1 || cfg.num_classes < 1 || cfg.dim < 1)
    throw std::invalid_argument("generate: counts must be positive");
  if (cfg.min_t > cfg.max_t || cfg.min_t < kMinGap + kMinInstanceLen + kTailReserve)
    throw std::invalid_argument("generate: video length range cannot hold an instance");
  if (cfg.stretch_factor < 2) throw std::invalid_argument("generate: stretch_factor must be >= 2");
  if (cfg.slow_fraction < 0.0 || cfg.slow_fraction > 1.0 || cfg.context_fraction < 0.0 ||
      cfg.context_fraction > 1.0)
    throw std::invalid_argument("generate: fractions must lie in [0,1]");
  if (cfg.slow_amplitude <= 0.0 || cfg.slow_amplitude > 1.0)
    throw std::invalid_argument("generate: slow_amplitude must lie in (0,1]");
  if (cfg.noise_sigma <= 0.0) throw std::invalid_argument("generate: noise_sigma must be positive");

  std::vector<SynthVideo> videos;
  videos.reserve(cfg.num_videos);
  for (int vi = 0; vi < cfg.num_videos; ++vi) {
    Rng rng(Rng::mix(Rng::mix(cfg.seed, kVideoStream), static_cast<std::uint64_t>(vi)));
    SynthVideo video;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "v%04d", vi);
    video.id = idbuf;

    const int t_len = cfg.min_t + rng.uniform_int(cfg.max_t - cfg.min_t + 1);
    video.features.snippet_seconds = cfg.snippet_seconds;
    video.features.data = Matrix(t_len, cfg.dim);
    video.label.bits.assign(cfg.num_classes + 1, 0);
    video.label.bits.back() = 1;  // background is present in every video

    std::vector<Placement> planted;
    const int want = 1 + rng.uniform_int(3);
    int cursor = 0;
    for (int inst = 0; inst < want; ++inst) {
      const int gap = kMinGap + rng.uniform_int(kMaxGap - kMinGap + 1);
      const int cls = rng.uniform_int(cfg.num_classes);
      const int base_len =
          kMinInstanceLen + rng.uniform_int(kMaxInstanceLen - kMinInstanceLen + 1);
      const bool want_slow = rng.uniform01() < cfg.slow_fraction;
      const int start = cursor + gap;
      if (start + base_len + kTailReserve > t_len) break;
      const bool slow =
          want_slow && start + base_len * cfg.stretch_factor + kTailReserve <= t_len;
      const int actual_len = slow ? base_len * cfg.stretch_factor : base_len;

      const Matrix motif = class_motif(cls, base_len, cfg.dim, cfg.seed);
      const Matrix segment = slow ? stretch(motif, cfg.stretch_factor) : motif;
      // Slow motion carries weak per-snippet evidence: the same trajectory at
      // reduced magnitude, sitting between context and normal instances.
      const double gain = slow ? cfg.slow_amplitude : 1.0;
      for (int t = 0; t < actual_len; ++t)
        for (int j = 0; j < cfg.dim; ++j) video.features.data(start + t, j) = gain * segment(t, j);
      planted.push_back(Placement{start, actual_len});
      video.label.bits[cls] = 1;
      video.gts.push_back(GroundTruthSegment{video.id, cls, start * cfg.snippet_seconds,
                                             (start + actual_len) * cfg.snippet_seconds, slow});
      cursor = start + actual_len;

      if (rng.uniform01() < cfg.context_fraction) {
        const int ctx_len =
            kMinContextLen + rng.uniform_int(kMaxContextLen - kMinContextLen + 1);
        if (cursor + ctx_len + kTailReserve <= t_len) {
          const Matrix ctx = class_motif(cls, ctx_len, cfg.dim, cfg.seed);
          for (int t = 0; t < ctx_len; ++t)
            for (int j = 0; j < cfg.dim; ++j)
              video.features.data(cursor + t, j) = cfg.context_amplitude * ctx(t, j);
          planted.push_back(Placement{cursor, ctx_len});
          cursor += ctx_len;
        }
      }
    }

    std::vector<bool> occupied(t_len, false);
    for (const Placement& p : planted)
      for (int t = p.start; t < p.start + p.length; ++t) occupied[t] = true;
    for (int t = 0; t < t_len; ++t) {
      if (occupied[t]) continue;
      for (int j = 0; j < cfg.dim; ++j)
        video.features.data(t, j) = cfg.noise_sigma * rng.normal();
    }
    videos.push_back(std::move(video));
  }
  return videos;
}

Corpus make_corpus(const SynthConfig& cfg, const std::vector<SynthVideo>& videos) {
  Corpus corpus;
  corpus.num_classes = cfg.num_classes;
  corpus.snippet_seconds = cfg.snippet_seconds;
  corpus.videos.reserve(videos.size());
  for (const SynthVideo& v : videos)
    corpus.videos.push_back(CorpusVideo{v.id, v.features, v.label, v.gts});
  return corpus;
}

}  // namespace smen
