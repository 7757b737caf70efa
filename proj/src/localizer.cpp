#include "smen/localizer.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "smen/dataio.hpp"

namespace smen {

namespace {

constexpr std::uint64_t kLocBatchStream = 0x6c6f63ULL;  // localizer batch-sampling tag

Matrix elementwise_max(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string("fuse: ") + what + " shape mismatch");
  Matrix out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(r, c) = std::max(a(r, c), b(r, c));
  return out;
}

void check_same_arch(const BackboneParams& a, const BackboneParams& b) {
  if (a.input_dim() != b.input_dim() || a.hidden_dim() != b.hidden_dim() ||
      a.num_classes() != b.num_classes())
    throw std::invalid_argument("localizer: branch architectures differ");
}

double branch_partial_loss(const BackboneOutput& out, const VideoLabel& label,
                           const LossWeights& w, double topk_ratio) {
  return classification_loss(out, label, topk_ratio) +
         w.lambda1 * guide_loss(out.cas, out.attn) +
         w.lambda3 * sparsity_loss(out.attn);
}

void add_params(BackboneParams& dst, const BackboneParams& src) {
  auto d = tensor_ptrs(dst);
  auto s = tensor_ptrs(src);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i]->size(); ++j) (*d[i])[j] += (*s[i])[j];
}

void scale_params(BackboneParams& p, double factor) {
  for_each_tensor(p, [&](std::vector<double>& t) {
    for (double& v : t) v *= factor;
  });
}

}  // namespace

Cas fuse(const Cas& a, const Cas& b) {
  return Cas{elementwise_max(a.logits, b.logits, "CAS")};
}

AttentionTriple fuse(const AttentionTriple& a, const AttentionTriple& b) {
  return AttentionTriple{elementwise_max(a.weights, b.weights, "attention")};
}

InferMode parse_infer_mode(const std::string& name) {
  if (name == "full") return InferMode::kFull;
  if (name == "n_only") return InferMode::kNOnly;
  if (name == "s_only") return InferMode::kSOnly;
  if (name == "combo") return InferMode::kCombo;
  throw std::invalid_argument("unknown inference mode: " + name);
}

std::string infer_mode_name(InferMode mode) {
  switch (mode) {
    case InferMode::kFull: return "full";
    case InferMode::kNOnly: return "n_only";
    case InferMode::kSOnly: return "s_only";
    case InferMode::kCombo: return "combo";
  }
  throw std::invalid_argument("unknown inference mode");
}

InferResult infer(const LocalizerState& state, const FeatureSequence& x) {
  const BackboneOutput n = forward(state.n_params, x);
  const BackboneOutput s = forward(state.s_params, x);
  return InferResult{fuse(n.cas, s.cas), fuse(n.attn, s.attn)};
}

InferResult infer_combo(const LocalizerState& state, const FeatureSequence& x,
                        InferMode mode) {
  switch (mode) {
    case InferMode::kFull:
      return infer(state, x);
    case InferMode::kNOnly: {
      const BackboneOutput n = forward(state.n_params, x);
      return InferResult{n.cas, n.attn};
    }
    case InferMode::kSOnly: {
      const BackboneOutput s = forward(state.s_params, x);
      return InferResult{s.cas, s.attn};
    }
    case InferMode::kCombo: {
      const BackboneOutput n = forward(state.n_params, x);
      const BackboneOutput s = forward(state.s_params, x);
      return InferResult{n.cas, s.attn};
    }
  }
  throw std::invalid_argument("unknown inference mode");
}

LocalizerTrainer::LocalizerTrainer(LocalizerState init, TrainConfig cfg)
    : state_(std::move(init)),
      cfg_(cfg),
      n_adam_(AdamState::zeros_like(state_.n_params)),
      s_adam_(AdamState::zeros_like(state_.s_params)) {
  check_same_arch(state_.n_params, state_.s_params);
}

double LocalizerTrainer::accumulate_gradients(const FeatureSequence& x,
                                              const VideoLabel& label, const SlowMask& mask,
                                              BackboneParams& n_grad,
                                              BackboneParams& s_grad) const {
  const LossWeights& w = state_.loss_weights;
  const BackboneOutput n_out = forward(state_.n_params, x);
  const FeatureSequence x_slow = apply_mask(x, mask);
  const BackboneOutput s_out = forward(state_.s_params, x_slow);

  const double feat_n = feature_separation_loss(n_out.embedded, n_out.attn, w.margin);
  const double feat_s = feature_separation_loss(s_out.embedded, s_out.attn, w.margin);
  const double loss = branch_partial_loss(n_out, label, w, cfg_.topk_ratio) +
                      branch_partial_loss(s_out, label, w, cfg_.topk_ratio) +
                      w.lambda2 * fused_feature_loss(feat_n, feat_s, w.beta);

  LossWeights wn = w;
  wn.lambda2 = w.lambda2 * (1.0 - w.beta);
  LossWeights ws = w;
  ws.lambda2 = w.lambda2 * w.beta;
  add_params(n_grad, backward(state_.n_params, x, n_out, label, wn, cfg_.topk_ratio));
  add_params(s_grad, backward(state_.s_params, x_slow, s_out, label, ws, cfg_.topk_ratio));
  return loss;
}

double LocalizerTrainer::train_step(const FeatureSequence& x, const VideoLabel& label,
                                    const SlowMask& mask) {
  BackboneParams n_grad = BackboneParams::zeros_like(state_.n_params);
  BackboneParams s_grad = BackboneParams::zeros_like(state_.s_params);
  const double loss = accumulate_gradients(x, label, mask, n_grad, s_grad);
  if (!std::isfinite(loss)) throw NumericError("localizer train_step: non-finite loss");
  adam_step(state_.n_params, n_grad, n_adam_, cfg_);
  adam_step(state_.s_params, s_grad, s_adam_, cfg_);
  return loss;
}

std::vector<double> LocalizerTrainer::train(const Corpus& corpus,
                                            const std::map<std::string, std::vector<int>>& masks) {
  if (corpus.videos.empty()) throw std::invalid_argument("localizer train: empty corpus");
  std::vector<double> curve;
  curve.reserve(cfg_.iterations);
  Rng rng(Rng::mix(cfg_.seed, kLocBatchStream));
  const int n = static_cast<int>(corpus.videos.size());
  for (int it = 0; it < cfg_.iterations; ++it) {
    BackboneParams n_grad = BackboneParams::zeros_like(state_.n_params);
    BackboneParams s_grad = BackboneParams::zeros_like(state_.s_params);
    double loss_sum = 0.0;
    for (int b = 0; b < cfg_.batch_size; ++b) {
      const CorpusVideo& video = corpus.videos[rng.uniform_int(n)];
      auto found = masks.find(video.id);
      if (found == masks.end())
        throw std::invalid_argument("localizer train: no mask for video " + video.id);
      double loss = 0.0;
      try {
        loss = accumulate_gradients(video.features, video.label, SlowMask{found->second},
                                    n_grad, s_grad);
      } catch (const NonFiniteError&) {
        throw NumericError("localizer train: non-finite values at iteration " +
                           std::to_string(it) + " on video " + video.id);
      }
      if (!std::isfinite(loss))
        throw NumericError("localizer train: non-finite loss at iteration " +
                           std::to_string(it) + " on video " + video.id);
      loss_sum += loss;
    }
    scale_params(n_grad, 1.0 / cfg_.batch_size);
    scale_params(s_grad, 1.0 / cfg_.batch_size);
    curve.push_back(loss_sum / cfg_.batch_size);
    adam_step(state_.n_params, n_grad, n_adam_, cfg_);
    adam_step(state_.s_params, s_grad, s_adam_, cfg_);
  }
  return curve;
}

void save_localizer(const std::string& dir, const LocalizerState& state) {
  make_dirs(dir);
  save_params(dir + "/n_branch.ckpt", state.n_params);
  save_params(dir + "/s_branch.ckpt", state.s_params);
  std::map<std::string, std::string> kv;
  kv["lambda1"] = format_double(state.loss_weights.lambda1);
  kv["lambda2"] = format_double(state.loss_weights.lambda2);
  kv["lambda3"] = format_double(state.loss_weights.lambda3);
  kv["beta"] = format_double(state.loss_weights.beta);
  kv["margin"] = format_double(state.loss_weights.margin);
  write_kv(dir + "/weights.cfg", kv);
}

LocalizerState load_localizer(const std::string& dir) {
  LocalizerState state;
  state.n_params = load_params(dir + "/n_branch.ckpt");
  state.s_params = load_params(dir + "/s_branch.ckpt");
  check_same_arch(state.n_params, state.s_params);
  const std::map<std::string, std::string> kv = read_kv(dir + "/weights.cfg");
  auto need = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw FormatError(dir + "/weights.cfg: missing key " + key);
    return std::stod(it->second);
  };
  state.loss_weights.lambda1 = need("lambda1");
  state.loss_weights.lambda2 = need("lambda2");
  state.loss_weights.lambda3 = need("lambda3");
  state.loss_weights.beta = need("beta");
  state.loss_weights.margin = need("margin");
  return state;
}

}  // namespace smen
