#include "smen/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "smen/mining.hpp"

namespace smen {

namespace {

constexpr std::uint64_t kBatchStream = 0x6261746368ULL;  // batch-sampling stream tag

void accumulate(BackboneParams& dst, const BackboneParams& src) {
  auto d = tensor_ptrs(dst);
  auto s = tensor_ptrs(src);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i]->size(); ++j) (*d[i])[j] += (*s[i])[j];
}

void scale(BackboneParams& p, double factor) {
  for_each_tensor(p, [&](std::vector<double>& t) {
    for (double& v : t) v *= factor;
  });
}

}  // namespace

AdamState AdamState::zeros_like(const BackboneParams& p) {
  AdamState s;
  s.m = BackboneParams::zeros_like(p);
  s.v = BackboneParams::zeros_like(p);
  s.step = 0;
  return s;
}

void adam_step(BackboneParams& params, const BackboneParams& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (cfg.adam_beta1 < 0.0 || cfg.adam_beta1 >= 1.0 || cfg.adam_beta2 < 0.0 ||
      cfg.adam_beta2 >= 1.0 || cfg.adam_eps <= 0.0)
    throw std::invalid_argument("adam_step: betas must lie in [0,1) and eps must be positive");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
  auto p = tensor_ptrs(params);
  auto g = tensor_ptrs(grads);
  auto m = tensor_ptrs(state.m);
  auto v = tensor_ptrs(state.v);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]->size() != g[i]->size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    for (std::size_t j = 0; j < p[i]->size(); ++j) {
      const double gj = (*g[i])[j];
      double& mj = (*m[i])[j];
      double& vj = (*v[i])[j];
      mj = cfg.adam_beta1 * mj + (1.0 - cfg.adam_beta1) * gj;
      vj = cfg.adam_beta2 * vj + (1.0 - cfg.adam_beta2) * gj * gj;
      const double mhat = mj / bc1;
      const double vhat = vj / bc2;
      (*p[i])[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

TrainResult train(const BackboneParams& init, const Corpus& corpus,
                  const LossWeights& weights, const TrainConfig& cfg,
                  const std::map<std::string, std::vector<int>>* mask_source) {
  if (corpus.videos.empty()) throw std::invalid_argument("train: empty corpus");
  if (cfg.iterations < 0) throw std::invalid_argument("train: negative iteration count");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

  TrainResult result;
  result.params = init;
  result.loss_curve.reserve(cfg.iterations);
  AdamState state = AdamState::zeros_like(init);
  Rng rng(Rng::mix(cfg.seed, kBatchStream));
  const int n = static_cast<int>(corpus.videos.size());

  for (int it = 0; it < cfg.iterations; ++it) {
    BackboneParams grad_sum = BackboneParams::zeros_like(init);
    double loss_sum = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const CorpusVideo& video = corpus.videos[rng.uniform_int(n)];
      FeatureSequence input = video.features;
      if (mask_source != nullptr) {
        auto found = mask_source->find(video.id);
        if (found == mask_source->end())
          throw std::invalid_argument("train: no mask for video " + video.id);
        input = apply_mask(input, SlowMask{found->second});
      }
      BackboneOutput out;
      double loss = 0.0;
      try {
        out = forward(result.params, input);
        loss = total_loss(out, video.label, weights, cfg.topk_ratio);
      } catch (const NonFiniteError&) {
        throw NumericError("train: non-finite values at iteration " + std::to_string(it) +
                           " on video " + video.id);
      }
      if (!std::isfinite(loss))
        throw NumericError("train: non-finite loss at iteration " + std::to_string(it) +
                           " on video " + video.id);
      loss_sum += loss;
      accumulate(grad_sum, backward(result.params, input, out, video.label, weights,
                                    cfg.topk_ratio));
    }
    scale(grad_sum, 1.0 / cfg.batch_size);
    result.loss_curve.push_back(loss_sum / cfg.batch_size);
    adam_step(result.params, grad_sum, state, cfg);
  }
  return result;
}

void write_train_run(const std::string& dir, const BackboneParams& params,
                     const std::vector<double>& loss_curve,
                     const std::map<std::string, std::string>& config_kv) {
  make_dirs(dir);
  save_params(dir + "/params.ckpt", params);
  write_loss_curve(dir + "/loss.csv", loss_curve);
  write_kv(dir + "/config.cfg", config_kv);
}

}  // namespace smen
