#include "smen/gradcheck.hpp"

#include <cmath>

#include "smen/backbone.hpp"
#include "smen/losses.hpp"

namespace smen {

namespace {

constexpr int kInputDim = 5;
constexpr int kHiddenDim = 6;
constexpr int kNumClasses = 3;
constexpr int kContextRadius = 1;
constexpr double kRelFloor = 0.01;

constexpr std::uint64_t kTripleStream = 0x67636865636bULL;

}  // namespace

GradCheckResult gradient_check(std::uint64_t seed, int num_triples, double step,
                               double tolerance) {
  const int lengths[3] = {1, 3, 8};
  GradCheckResult result;
  result.triples = num_triples;
  result.tolerance = tolerance;

  LossWeights weights;
  weights.margin = 2.0;  // keeps the separation hinge active so its path is exercised
  const double topk_ratio = 0.125;

  for (int i = 0; i < num_triples; ++i) {
    const std::uint64_t triple_seed = Rng::mix(Rng::mix(seed, kTripleStream), i);
    Rng rng(triple_seed);
    const int t_len = lengths[i % 3];

    BackboneParams params =
        init_params(kInputDim, kHiddenDim, kNumClasses, kContextRadius, triple_seed);
    FeatureSequence x;
    x.data = Matrix(t_len, kInputDim);
    for (double& v : x.data.data()) v = rng.normal();
    VideoLabel label;
    label.bits.assign(kNumClasses + 1, 0);
    for (int c = 0; c < kNumClasses; ++c) label.bits[c] = rng.uniform01() < 0.5 ? 1 : 0;
    bool any = false;
    for (int c = 0; c < kNumClasses; ++c) any = any || label.bits[c] == 1;
    if (!any) label.bits[rng.uniform_int(kNumClasses)] = 1;
    label.bits[kNumClasses] = 1;

    const BackboneOutput out = forward(params, x);
    const BackboneParams analytic = backward(params, x, out, label, weights, topk_ratio);

    auto loss_at = [&](const BackboneParams& p) {
      return total_loss(forward(p, x), label, weights, topk_ratio);
    };
    auto p_tensors = tensor_ptrs(params);
    auto a_tensors = tensor_ptrs(analytic);
    for (std::size_t ti = 0; ti < p_tensors.size(); ++ti) {
      for (std::size_t j = 0; j < p_tensors[ti]->size(); ++j) {
        const double saved = (*p_tensors[ti])[j];
        (*p_tensors[ti])[j] = saved + step;
        const double up = loss_at(params);
        (*p_tensors[ti])[j] = saved - step;
        const double down = loss_at(params);
        (*p_tensors[ti])[j] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = (*a_tensors[ti])[j];
        const double denom = std::max({std::fabs(a), std::fabs(numeric), kRelFloor});
        const double rel = std::fabs(a - numeric) / denom;
        if (rel > result.max_rel_err) result.max_rel_err = rel;
        ++result.params_checked;
      }
    }
  }
  result.passed = result.max_rel_err <= tolerance;
  return result;
}

}  // namespace smen
