#include "smen/backbone.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "smen/dataio.hpp"

namespace smen {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

BackboneParams BackboneParams::zeros_like(const BackboneParams& p) {
  BackboneParams z;
  z.embed_w = Matrix(p.embed_w.rows(), p.embed_w.cols());
  z.embed_b.assign(p.embed_b.size(), 0.0);
  z.cls_w = Matrix(p.cls_w.rows(), p.cls_w.cols());
  z.cls_b.assign(p.cls_b.size(), 0.0);
  z.attn_w = Matrix(p.attn_w.rows(), p.attn_w.cols());
  z.attn_b.assign(p.attn_b.size(), 0.0);
  z.context_radius = p.context_radius;
  return z;
}

std::size_t param_count(const BackboneParams& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const std::vector<double>& t) { n += t.size(); });
  return n;
}

namespace {

void fill_xavier(Matrix& w, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : w.data()) {
    v = rng.uniform(-bound, bound);
  }
}

}  // namespace

BackboneParams init_params(int input_dim, int hidden_dim, int num_classes,
                           int context_radius, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || num_classes < 1 || context_radius < 0) {
    throw std::invalid_argument("init_params: dimensions must be positive");
  }
  BackboneParams p;
  p.embed_w = Matrix(input_dim, hidden_dim);
  p.embed_b.assign(hidden_dim, 0.0);
  p.cls_w = Matrix(hidden_dim, num_classes + 1);
  p.cls_b.assign(num_classes + 1, 0.0);
  p.attn_w = Matrix(hidden_dim, 3);
  p.attn_b.assign(3, 0.0);
  p.context_radius = context_radius;

  Rng rng(seed);
  fill_xavier(p.embed_w, input_dim, hidden_dim, rng);
  fill_xavier(p.cls_w, hidden_dim, num_classes + 1, rng);
  fill_xavier(p.attn_w, hidden_dim, 3, rng);
  return p;
}

Matrix temporal_window_mean(const Matrix& x, int radius) {
  const int t_len = x.rows();
  const int d = x.cols();
  Matrix out(t_len, d);
  for (int t = 0; t < t_len; ++t) {
    const int lo = std::max(0, t - radius);
    const int hi = std::min(t_len - 1, t + radius);
    const double inv = 1.0 / (hi - lo + 1);
    for (int j = 0; j < d; ++j) {
      double sum = 0.0;
      for (int u = lo; u <= hi; ++u) sum += x(u, j);
      out(t, j) = sum * inv;
    }
  }
  return out;
}

BackboneOutput forward(const BackboneParams& params, const FeatureSequence& x) {
  const int t_len = x.length();
  const int d = x.dim();
  const int h = params.hidden_dim();
  const int cols = params.cls_w.cols();
  if (d != params.input_dim()) {
    throw std::invalid_argument("forward: feature dim does not match params");
  }
  if (t_len < 1) {
    throw std::invalid_argument("forward: empty feature sequence");
  }

  const Matrix xbar = temporal_window_mean(x.data, params.context_radius);

  BackboneOutput out;
  out.embedded = Matrix(t_len, h);
  out.cas.logits = Matrix(t_len, cols);
  out.attn.weights = Matrix(t_len, 3);

  std::vector<double> attn_logits(3);
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < h; ++j) {
      double acc = params.embed_b[j];
      for (int i = 0; i < d; ++i) acc += params.embed_w(i, j) * xbar(t, i);
      out.embedded(t, j) = acc > 0.0 ? acc : 0.0;
    }
    for (int c = 0; c < cols; ++c) {
      double acc = params.cls_b[c];
      for (int j = 0; j < h; ++j) acc += params.cls_w(j, c) * out.embedded(t, j);
      out.cas.logits(t, c) = acc;
    }
    for (int a = 0; a < 3; ++a) {
      double acc = params.attn_b[a];
      for (int j = 0; j < h; ++j) acc += params.attn_w(j, a) * out.embedded(t, j);
      attn_logits[a] = acc;
    }
    const std::vector<double> row = softmax(attn_logits);
    for (int a = 0; a < 3; ++a) out.attn.weights(t, a) = row[a];
  }
  return out;
}

Cas weighted_cas(const Cas& cas, const AttentionTriple& attn, Branch branch) {
  if (cas.length() != attn.length()) {
    throw std::invalid_argument("weighted_cas: length mismatch");
  }
  Cas out;
  out.logits = Matrix(cas.logits.rows(), cas.logits.cols());
  const int b = static_cast<int>(branch);
  for (int t = 0; t < cas.logits.rows(); ++t) {
    const double w = attn.weights(t, b);
    for (int c = 0; c < cas.logits.cols(); ++c) {
      out.logits(t, c) = w * cas.logits(t, c);
    }
  }
  return out;
}

int topk_count(int t_len, double topk_ratio) {
  return std::max(1, static_cast<int>(std::floor(t_len * topk_ratio)));
}

std::vector<double> video_scores(const Cas& cas_branch, double topk_ratio) {
  if (topk_ratio <= 0.0 || topk_ratio > 1.0) {
    throw std::invalid_argument("video_scores: topk_ratio must be in (0,1]");
  }
  const int t_len = cas_branch.logits.rows();
  const int k = topk_count(t_len, topk_ratio);
  std::vector<double> pooled(cas_branch.logits.cols());
  for (int c = 0; c < cas_branch.logits.cols(); ++c) {
    pooled[c] = topk_mean(cas_branch.logits.column(c), k);
  }
  return softmax(pooled);
}

void save_params(const std::string& path, const BackboneParams& params) {
  BinaryWriter w(path);
  w.write_magic("SMENPRM1");
  w.write_i32(params.input_dim());
  w.write_i32(params.hidden_dim());
  w.write_i32(params.num_classes());
  w.write_i32(params.context_radius);
  for_each_tensor(params, [&](const std::vector<double>& t) { w.write_f64_array(t); });
}

BackboneParams load_params(const std::string& path) {
  BinaryReader r(path);
  r.expect_magic("SMENPRM1");
  const int d = r.read_i32();
  const int h = r.read_i32();
  const int c = r.read_i32();
  const int radius = r.read_i32();
  if (d < 1 || h < 1 || c < 1 || radius < 0) {
    throw FormatError(path + ": invalid dimensions in checkpoint header");
  }
  BackboneParams p;
  p.embed_w = Matrix(d, h);
  p.embed_b.assign(h, 0.0);
  p.cls_w = Matrix(h, c + 1);
  p.cls_b.assign(c + 1, 0.0);
  p.attn_w = Matrix(h, 3);
  p.attn_b.assign(3, 0.0);
  p.context_radius = radius;
  for_each_tensor(p, [&](std::vector<double>& t) { r.read_f64_array(t); });
  r.expect_eof();
  return p;
}

}  // namespace smen
