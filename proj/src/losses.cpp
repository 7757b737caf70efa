#include "smen/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace smen {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kMeanEps = 1e-8;
constexpr double kNormEps = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

/// Attention-weighted mean embedding of one branch plus the pieces the
/// backward pass needs.
struct BranchEmbedding {
  std::vector<double> weighted_sum;  // w = sum_t attn(t,b) * emb(t,:)
  double attn_sum = 0.0;             // S = sum_t attn(t,b)
  std::vector<double> mean;          // f = w / (S + eps)
  double norm = 0.0;                 // ||f||
  std::vector<double> unit;          // g = f / (||f|| + eps)
};

BranchEmbedding branch_embedding(const Matrix& emb, const AttentionTriple& attn, int b) {
  const int t_len = emb.rows();
  const int h = emb.cols();
  BranchEmbedding out;
  out.weighted_sum.assign(h, 0.0);
  for (int t = 0; t < t_len; ++t) {
    const double a = attn.weights(t, b);
    out.attn_sum += a;
    for (int j = 0; j < h; ++j) out.weighted_sum[j] += a * emb(t, j);
  }
  out.mean.resize(h);
  for (int j = 0; j < h; ++j) out.mean[j] = out.weighted_sum[j] / (out.attn_sum + kMeanEps);
  double sq = 0.0;
  for (double v : out.mean) sq += v * v;
  out.norm = std::sqrt(sq);
  out.unit.resize(h);
  for (int j = 0; j < h; ++j) out.unit[j] = out.mean[j] / (out.norm + kNormEps);
  return out;
}

}  // namespace

std::vector<int> topk_indices(const std::vector<double>& v, int k) {
  if (k <= 0 || k > static_cast<int>(v.size()))
    throw std::invalid_argument("topk_indices: k out of range");
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v[a] > v[b]; });
  idx.resize(k);
  return idx;
}

BranchTargets build_branch_targets(const VideoLabel& label) {
  const int n = static_cast<int>(label.bits.size());
  if (n < 2) throw std::invalid_argument("build_branch_targets: label needs at least one action class");
  BranchTargets t;
  t.y_ins.assign(n, 0.0);
  t.y_con.assign(n, 0.0);
  t.y_bac.assign(n, 0.0);
  for (int c = 0; c < n - 1; ++c) {
    t.y_ins[c] = label.bits[c];
    t.y_con[c] = label.bits[c];
  }
  t.y_ins[n - 1] = 0.0;
  t.y_con[n - 1] = 1.0;
  t.y_bac[n - 1] = 1.0;
  return t;
}

double bce(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("bce: prediction/target size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double q = clamp_prob(pred[i]);
    sum += -(target[i] * std::log(q) + (1.0 - target[i]) * std::log(1.0 - q));
  }
  return sum / static_cast<double>(pred.size());
}

double classification_loss(const BackboneOutput& out, const VideoLabel& label,
                           double topk_ratio) {
  const BranchTargets targets = build_branch_targets(label);
  const Branch branches[3] = {Branch::kInstance, Branch::kContext, Branch::kBackground};
  const std::vector<double>* ys[3] = {&targets.y_ins, &targets.y_con, &targets.y_bac};
  double loss = 0.0;
  for (int b = 0; b < 3; ++b) {
    const Cas wc = weighted_cas(out.cas, out.attn, branches[b]);
    loss += bce(video_scores(wc, topk_ratio), *ys[b]);
  }
  return loss;
}

double guide_loss(const Cas& cas, const AttentionTriple& attn) {
  const int t_len = cas.length();
  if (t_len == 0 || attn.length() != t_len)
    throw std::invalid_argument("guide_loss: CAS/attention length mismatch");
  const int bg = cas.logits.cols() - 1;
  double sum = 0.0;
  std::vector<double> row(cas.logits.cols());
  for (int t = 0; t < t_len; ++t) {
    for (int c = 0; c < cas.logits.cols(); ++c) row[c] = cas.logits(t, c);
    const std::vector<double> p = softmax(row);
    sum += std::abs(attn.at(t, Branch::kBackground) - p[bg]);
  }
  return sum / t_len;
}

double feature_separation_loss(const Matrix& embedded, const AttentionTriple& attn,
                               double margin) {
  if (embedded.rows() != attn.length() || embedded.rows() == 0)
    throw std::invalid_argument("feature_separation_loss: embedding/attention length mismatch");
  BranchEmbedding e[3];
  for (int b = 0; b < 3; ++b) e[b] = branch_embedding(embedded, attn, b);
  double loss = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      double sq = 0.0;
      for (std::size_t j = 0; j < e[a].unit.size(); ++j) {
        const double diff = e[a].unit[j] - e[b].unit[j];
        sq += diff * diff;
      }
      loss += std::max(0.0, margin - std::sqrt(sq));
    }
  }
  return loss;
}

double sparsity_loss(const AttentionTriple& attn) {
  const int t_len = attn.length();
  if (t_len == 0) throw std::invalid_argument("sparsity_loss: empty attention");
  double sum = 0.0;
  for (int t = 0; t < t_len; ++t) sum += attn.at(t, Branch::kInstance);
  return sum / t_len;
}

double total_loss(const BackboneOutput& out, const VideoLabel& label,
                  const LossWeights& weights, double topk_ratio) {
  return classification_loss(out, label, topk_ratio) +
         weights.lambda1 * guide_loss(out.cas, out.attn) +
         weights.lambda2 * feature_separation_loss(out.embedded, out.attn, weights.margin) +
         weights.lambda3 * sparsity_loss(out.attn);
}

double fused_feature_loss(double l_feat_normal, double l_feat_slow, double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("fused_feature_loss: beta outside [0,1]");
  return (1.0 - beta) * l_feat_normal + beta * l_feat_slow;
}

BackboneParams backward(const BackboneParams& params, const FeatureSequence& x,
                        const BackboneOutput& out, const VideoLabel& label,
                        const LossWeights& weights, double topk_ratio) {
  const Matrix& cas = out.cas.logits;
  const Matrix& attn = out.attn.weights;
  const Matrix& emb = out.embedded;
  const int t_len = cas.rows();
  const int n_cls = cas.cols();  // C + 1
  const int h = emb.cols();
  const int d = x.dim();
  if (t_len == 0 || attn.rows() != t_len || emb.rows() != t_len || x.length() != t_len)
    throw std::invalid_argument("backward: inconsistent forward output shapes");

  BackboneParams grad = BackboneParams::zeros_like(params);
  Matrix d_cas(t_len, n_cls);
  Matrix d_attn(t_len, 3);
  Matrix d_emb(t_len, h);

  // Branch classification terms.
  const BranchTargets targets = build_branch_targets(label);
  const std::vector<double>* ys[3] = {&targets.y_ins, &targets.y_con, &targets.y_bac};
  const int k = topk_count(t_len, topk_ratio);
  for (int b = 0; b < 3; ++b) {
    std::vector<std::vector<int>> selected(n_cls);
    std::vector<double> pooled(n_cls);
    for (int c = 0; c < n_cls; ++c) {
      std::vector<double> col(t_len);
      for (int t = 0; t < t_len; ++t) col[t] = attn(t, b) * cas(t, c);
      selected[c] = topk_indices(col, k);
      double sum = 0.0;
      for (int t : selected[c]) sum += col[t];
      pooled[c] = sum / k;
    }
    const std::vector<double> p = softmax(pooled);
    const std::vector<double>& y = *ys[b];
    std::vector<double> dp(n_cls, 0.0);
    for (int c = 0; c < n_cls; ++c) {
      // The clamp kills sensitivity outside its range.
      if (p[c] > kProbClamp && p[c] < 1.0 - kProbClamp) {
        const double q = clamp_prob(p[c]);
        dp[c] = (-(y[c] / q) + (1.0 - y[c]) / (1.0 - q)) / n_cls;
      }
    }
    double dot = 0.0;
    for (int c = 0; c < n_cls; ++c) dot += dp[c] * p[c];
    for (int c = 0; c < n_cls; ++c) {
      const double d_pooled = p[c] * (dp[c] - dot);
      const double d_snippet = d_pooled / k;
      for (int t : selected[c]) {
        d_cas(t, c) += d_snippet * attn(t, b);
        d_attn(t, b) += d_snippet * cas(t, c);
      }
    }
  }

  // Guide term: |attn_bac - softmax(cas row)[background]|.
  const int bg = n_cls - 1;
  for (int t = 0; t < t_len; ++t) {
    std::vector<double> row(n_cls);
    for (int c = 0; c < n_cls; ++c) row[c] = cas(t, c);
    const std::vector<double> p = softmax(row);
    const double r = attn(t, 2) - p[bg];
    const double sign = (r > 0.0) - (r < 0.0);
    const double scale = weights.lambda1 * sign / t_len;
    d_attn(t, 2) += scale;
    const double up_bg = -scale;  // d loss / d p[bg]
    const double sdot = up_bg * p[bg];
    for (int c = 0; c < n_cls; ++c)
      d_cas(t, c) += p[c] * ((c == bg ? up_bg : 0.0) - sdot);
  }

  // Feature separation term.
  {
    BranchEmbedding e[3];
    for (int b = 0; b < 3; ++b) e[b] = branch_embedding(emb, out.attn, b);
    std::vector<std::vector<double>> d_unit(3, std::vector<double>(h, 0.0));
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        std::vector<double> diff(h);
        double sq = 0.0;
        for (int j = 0; j < h; ++j) {
          diff[j] = e[a].unit[j] - e[b].unit[j];
          sq += diff[j] * diff[j];
        }
        const double dist = std::sqrt(sq);
        if (dist < weights.margin && dist > kNormEps) {
          for (int j = 0; j < h; ++j) {
            const double g = weights.lambda2 * (-diff[j] / dist);
            d_unit[a][j] += g;
            d_unit[b][j] -= g;
          }
        }
      }
    }
    for (int b = 0; b < 3; ++b) {
      const BranchEmbedding& eb = e[b];
      std::vector<double> d_mean(h, 0.0);
      if (eb.norm > kNormEps) {
        double fdg = 0.0;
        for (int j = 0; j < h; ++j) fdg += eb.mean[j] * d_unit[b][j];
        const double denom = eb.norm + kNormEps;
        for (int j = 0; j < h; ++j)
          d_mean[j] = d_unit[b][j] / denom - eb.mean[j] * fdg / (eb.norm * denom * denom);
      }
      const double denom = eb.attn_sum + kMeanEps;
      std::vector<double> d_wsum(h);
      double d_attn_sum = 0.0;
      for (int j = 0; j < h; ++j) {
        d_wsum[j] = d_mean[j] / denom;
        d_attn_sum -= eb.weighted_sum[j] * d_mean[j] / (denom * denom);
      }
      for (int t = 0; t < t_len; ++t) {
        double edw = 0.0;
        for (int j = 0; j < h; ++j) {
          d_emb(t, j) += attn(t, b) * d_wsum[j];
          edw += emb(t, j) * d_wsum[j];
        }
        d_attn(t, b) += edw + d_attn_sum;
      }
    }
  }

  // Sparsity term.
  for (int t = 0; t < t_len; ++t) d_attn(t, 0) += weights.lambda3 / t_len;

  // Heads, softmax rows, ReLU and the embedding layer.
  const Matrix xbar = temporal_window_mean(x.data, params.context_radius);
  for (int t = 0; t < t_len; ++t) {
    double adot = 0.0;
    for (int a = 0; a < 3; ++a) adot += d_attn(t, a) * attn(t, a);
    double dz[3];
    for (int a = 0; a < 3; ++a) dz[a] = attn(t, a) * (d_attn(t, a) - adot);

    std::vector<double> d_row(h);
    for (int j = 0; j < h; ++j) {
      double acc = d_emb(t, j);
      for (int c = 0; c < n_cls; ++c) acc += params.cls_w(j, c) * d_cas(t, c);
      for (int a = 0; a < 3; ++a) acc += params.attn_w(j, a) * dz[a];
      d_row[j] = acc;
    }

    for (int c = 0; c < n_cls; ++c) {
      grad.cls_b[c] += d_cas(t, c);
      for (int j = 0; j < h; ++j) grad.cls_w(j, c) += emb(t, j) * d_cas(t, c);
    }
    for (int a = 0; a < 3; ++a) {
      grad.attn_b[a] += dz[a];
      for (int j = 0; j < h; ++j) grad.attn_w(j, a) += emb(t, j) * dz[a];
    }
    for (int j = 0; j < h; ++j) {
      const double d_pre = emb(t, j) > 0.0 ? d_row[j] : 0.0;
      if (d_pre == 0.0) continue;
      grad.embed_b[j] += d_pre;
      for (int i = 0; i < d; ++i) grad.embed_w(i, j) += xbar(t, i) * d_pre;
    }
  }

  return grad;
}

}  // namespace smen
