#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "smen/backbone.hpp"
#include "smen/gradcheck.hpp"
#include "smen/losses.hpp"

using namespace smen;

namespace {

BackboneOutput random_output(Rng& rng, int t_len, int num_classes, int h) {
  BackboneOutput out;
  out.cas.logits = Matrix(t_len, num_classes + 1);
  for (double& v : out.cas.logits.data()) v = rng.uniform(-3.0, 3.0);
  out.attn.weights = Matrix(t_len, 3);
  for (int t = 0; t < t_len; ++t) {
    const std::vector<double> row =
        softmax({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    for (int b = 0; b < 3; ++b) out.attn.weights(t, b) = row[b];
  }
  out.embedded = Matrix(t_len, h);
  for (double& v : out.embedded.data()) v = std::max(0.0, rng.uniform(-1.0, 2.0));
  return out;
}

VideoLabel random_label(Rng& rng, int num_classes) {
  VideoLabel label;
  label.bits.assign(num_classes + 1, 0);
  label.bits[rng.uniform_int(num_classes)] = 1;
  for (int c = 0; c < num_classes; ++c)
    if (rng.uniform01() < 0.4) label.bits[c] = 1;
  label.bits[num_classes] = 1;
  return label;
}

// Straight-line recomputation of the classification loss with its own pooling
// and clamping, used as an oracle against the production composition.
double classification_oracle(const BackboneOutput& out, const VideoLabel& label,
                             double topk_ratio) {
  const int t_len = out.cas.length();
  const int n_cls = out.cas.logits.cols();
  const int k = std::max(1, static_cast<int>(std::floor(t_len * topk_ratio)));
  const BranchTargets targets = build_branch_targets(label);
  const std::vector<double>* ys[3] = {&targets.y_ins, &targets.y_con, &targets.y_bac};
  double loss = 0.0;
  for (int b = 0; b < 3; ++b) {
    std::vector<double> pooled(n_cls);
    for (int c = 0; c < n_cls; ++c) {
      std::vector<double> col(t_len);
      for (int t = 0; t < t_len; ++t) col[t] = out.attn.weights(t, b) * out.cas.logits(t, c);
      std::sort(col.begin(), col.end(), std::greater<double>());
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += col[i];
      pooled[c] = sum / k;
    }
    const std::vector<double> p = softmax(pooled);
    double branch = 0.0;
    for (int c = 0; c < n_cls; ++c) {
      const double q = std::clamp(p[c], 1e-12, 1.0 - 1e-12);
      const double y = (*ys[b])[c];
      branch += -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
    }
    loss += branch / n_cls;
  }
  return loss;
}

}  // namespace

TEST_CASE("branch targets split action and background bits") {
  VideoLabel label;
  label.bits = {1, 0, 1};  // one action class present, background set
  const BranchTargets t = build_branch_targets(label);
  CHECK(t.y_ins == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(t.y_con == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(t.y_bac == std::vector<double>{0.0, 0.0, 1.0});

  VideoLabel bad;
  bad.bits = {1};
  CHECK_THROWS_AS(build_branch_targets(bad), std::invalid_argument);
}

TEST_CASE("bce hand values and clamping") {
  CHECK(bce({0.5}, {1.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce({0.9}, {0.0}) == doctest::Approx(-std::log(0.1)).epsilon(1e-12));
  // Clamp keeps the endpoints finite.
  CHECK(bce({1.0}, {1.0}) < 1e-11);
  CHECK(bce({0.0}, {1.0}) == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
  CHECK_THROWS_AS(bce({0.5}, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(bce({}, {}), std::invalid_argument);
}

TEST_CASE("guide loss hand case") {
  Cas cas;
  cas.logits = Matrix(1, 2);
  cas.logits(0, 0) = 0.0;
  cas.logits(0, 1) = std::log(4.0);  // softmax -> [0.2, 0.8], background 0.8
  AttentionTriple attn;
  attn.weights = Matrix(1, 3);
  attn.weights(0, 0) = 0.4;
  attn.weights(0, 1) = 0.3;
  attn.weights(0, 2) = 0.3;
  CHECK(guide_loss(cas, attn) == doctest::Approx(0.5).epsilon(1e-12));

  AttentionTriple short_attn;
  short_attn.weights = Matrix(2, 3);
  CHECK_THROWS_AS(guide_loss(cas, short_attn), std::invalid_argument);
}

TEST_CASE("feature separation: identical branch embeddings pay full margin") {
  Matrix emb(1, 2);
  emb(0, 0) = 2.0;
  emb(0, 1) = 0.0;
  AttentionTriple attn;
  attn.weights = Matrix(1, 3, 1.0 / 3.0);
  // All three branch means coincide, so each of the three pairs pays margin.
  CHECK(feature_separation_loss(emb, attn, 0.7) == doctest::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("feature separation: orthogonal unit embeddings clear the margin") {
  Matrix emb(2, 2);
  emb(0, 0) = 3.0;
  emb(0, 1) = 0.0;
  emb(1, 0) = 0.0;
  emb(1, 1) = 5.0;
  AttentionTriple attn;
  attn.weights = Matrix(2, 3, 0.0);
  attn.weights(0, 0) = 1.0;  // instance looks only at t=0
  attn.weights(1, 1) = 1.0;  // context only at t=1
  // instance/context are orthogonal units (distance sqrt(2) > 1), the
  // background embedding is the zero vector at distance ~1 from both.
  CHECK(feature_separation_loss(emb, attn, 1.0) <= 1e-6);
}

TEST_CASE("sparsity loss averages the instance column") {
  AttentionTriple attn;
  attn.weights = Matrix(2, 3, 0.0);
  attn.weights(0, 0) = 0.2;
  attn.weights(1, 0) = 0.4;
  CHECK(sparsity_loss(attn) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("classification loss matches an independent recomputation") {
  Rng rng(51);
  for (int rep = 0; rep < 50; ++rep) {
    const int num_classes = 1 + rng.uniform_int(4);
    const int t_len = 1 + rng.uniform_int(12);
    const BackboneOutput out = random_output(rng, t_len, num_classes, 4);
    const VideoLabel label = random_label(rng, num_classes);
    const double ratio = 0.05 + 0.4 * rng.uniform01();
    CHECK(classification_loss(out, label, ratio) ==
          doctest::Approx(classification_oracle(out, label, ratio)).epsilon(1e-10));
  }
}

TEST_CASE("total loss is the weighted sum of its parts") {
  Rng rng(52);
  const BackboneOutput out = random_output(rng, 6, 3, 4);
  const VideoLabel label = random_label(rng, 3);
  LossWeights w;
  w.lambda1 = 0.7;
  w.lambda2 = 0.3;
  w.lambda3 = 0.05;
  w.margin = 1.5;
  const double expected = classification_loss(out, label, 0.25) +
                          w.lambda1 * guide_loss(out.cas, out.attn) +
                          w.lambda2 * feature_separation_loss(out.embedded, out.attn, w.margin) +
                          w.lambda3 * sparsity_loss(out.attn);
  CHECK(total_loss(out, label, w, 0.25) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("fused feature loss endpoints are exact") {
  const double a = 0.731;
  const double b = 1.618;
  CHECK(fused_feature_loss(a, b, 0.0) == a);
  CHECK(fused_feature_loss(a, b, 1.0) == b);
  CHECK(fused_feature_loss(a, b, 0.25) == doctest::Approx(0.75 * a + 0.25 * b).epsilon(1e-15));
  CHECK_THROWS_AS(fused_feature_loss(a, b, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(fused_feature_loss(a, b, 1.1), std::invalid_argument);
}

TEST_CASE("topk_indices breaks ties toward the lowest index") {
  CHECK(topk_indices({5.0, 5.0, 3.0}, 2) == std::vector<int>{0, 1});
  CHECK(topk_indices({1.0, 3.0, 2.0}, 2) == std::vector<int>{1, 2});
  CHECK(topk_indices({2.0, 2.0, 2.0}, 3) == std::vector<int>{0, 1, 2});
  CHECK_THROWS_AS(topk_indices({1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(topk_indices({1.0}, 2), std::invalid_argument);
}

TEST_CASE("analytic gradients agree with finite differences") {
  const GradCheckResult r = gradient_check(5, 6);
  CHECK(r.passed);
  CHECK(r.max_rel_err < r.tolerance);
  CHECK(r.params_checked > 0);
}

TEST_CASE("backward validates shapes") {
  const BackboneParams p = init_params(3, 4, 2, 1, 8);
  FeatureSequence x;
  x.data = Matrix(4, 3);
  const BackboneOutput out = forward(p, x);
  VideoLabel label;
  label.bits = {1, 0, 1};
  FeatureSequence wrong;
  wrong.data = Matrix(5, 3);
  CHECK_THROWS_AS(backward(p, wrong, out, label, LossWeights{}, 0.25), std::invalid_argument);
}
