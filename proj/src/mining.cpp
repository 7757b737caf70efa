#include "smen/mining.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace smen {

FeatureSequence subsample(const FeatureSequence& x, int tau) {
  if (tau < 1) throw std::invalid_argument("subsample: tau must be >= 1");
  const int t_len = x.length();
  if (t_len < tau)
    throw std::invalid_argument("subsample: sequence length " + std::to_string(t_len) +
                                " shorter than tau " + std::to_string(tau));
  const int out_len = t_len / tau;
  FeatureSequence out;
  out.snippet_seconds = x.snippet_seconds;
  out.data = Matrix(out_len, x.dim());
  for (int i = 0; i < out_len; ++i)
    for (int j = 0; j < x.dim(); ++j) out.data(i, j) = x.data(i * tau, j);
  return out;
}

std::vector<double> activation_track(const Cas& cas) {
  const int t_len = cas.length();
  const int n_act = cas.num_classes();
  if (n_act < 1) throw std::invalid_argument("activation_track: CAS has no action classes");
  std::vector<double> track(t_len);
  for (int t = 0; t < t_len; ++t) {
    double best = cas.logits(t, 0);
    for (int c = 1; c < n_act; ++c) best = std::max(best, cas.logits(t, c));
    track[t] = best;
  }
  return track;
}

std::vector<double> smooth_activations(const std::vector<double>& m_norm, double s,
                                       bool smooth_enabled) {
  if (!smooth_enabled || m_norm.empty()) return m_norm;
  double mean = 0.0;
  for (double v : m_norm) mean += v;
  mean /= static_cast<double>(m_norm.size());
  if (mean == 0.0) return m_norm;
  double var = 0.0;
  for (double v : m_norm) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m_norm.size());
  const double cv = std::sqrt(var) / mean;
  const double alpha = std::clamp(1.0 - s * cv, 0.05, 1.0);
  std::vector<double> out(m_norm.size());
  for (std::size_t i = 0; i < m_norm.size(); ++i) out[i] = std::pow(m_norm[i], alpha);
  return out;
}

std::vector<int> binarize(const std::vector<double>& m_smooth, double theta) {
  std::vector<int> out(m_smooth.size());
  for (std::size_t i = 0; i < m_smooth.size(); ++i) out[i] = m_smooth[i] >= theta ? 1 : 0;
  return out;
}

SlowMask upsample_mask(const std::vector<int>& mask, int t_out) {
  const int src_len = static_cast<int>(mask.size());
  if (src_len < 1) throw std::invalid_argument("upsample_mask: empty source mask");
  if (t_out < src_len)
    throw std::invalid_argument("upsample_mask: target length shorter than source");
  SlowMask out;
  out.bits.resize(t_out);
  for (int j = 0; j < t_out; ++j) {
    int idx = static_cast<int>(std::floor((j + 0.5) * src_len / t_out));
    out.bits[j] = mask[std::min(idx, src_len - 1)];
  }
  return out;
}

FeatureSequence apply_mask(const FeatureSequence& x, const SlowMask& mask) {
  if (mask.length() != x.length())
    throw std::invalid_argument("apply_mask: mask length " + std::to_string(mask.length()) +
                                " != sequence length " + std::to_string(x.length()));
  FeatureSequence out;
  out.snippet_seconds = x.snippet_seconds;
  out.data = Matrix(x.length(), x.dim());
  for (int t = 0; t < x.length(); ++t) {
    if (mask.bits[t] == 0) continue;
    for (int j = 0; j < x.dim(); ++j) out.data(t, j) = x.data(t, j);
  }
  return out;
}

SlowMask generate_mask(const BackboneParams& miner_params, const FeatureSequence& x,
                       const MiningConfig& cfg) {
  const FeatureSequence sub = subsample(x, cfg.tau);
  const BackboneOutput out = forward(miner_params, sub);
  const std::vector<double> track = activation_track(out.cas);
  const std::vector<double> norm = min_max_normalize(track);
  const std::vector<double> smooth = smooth_activations(norm, cfg.s, cfg.smooth_enabled);
  const std::vector<int> bits = binarize(smooth, cfg.theta);
  return upsample_mask(bits, x.length());
}

}  // namespace smen
