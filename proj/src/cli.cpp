#include "smen/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "smen/backbone.hpp"
#include "smen/dataio.hpp"
#include "smen/gradcheck.hpp"
#include "smen/localizer.hpp"
#include "smen/losses.hpp"
#include "smen/metrics.hpp"
#include "smen/mining.hpp"
#include "smen/proposals.hpp"
#include "smen/synthgen.hpp"
#include "smen/trainer.hpp"

namespace smen {

namespace {

constexpr std::uint64_t kMinerInitStream = 0x6d696e6572ULL;
constexpr std::uint64_t kNBranchInitStream = 0x6e6272ULL;
constexpr std::uint64_t kSBranchInitStream = 0x736272ULL;

/// Every pipeline knob, loadable from a key=value file with CLI overrides on
/// top. Defaults follow the reference configuration; desk-scale sizes
/// (iterations, batch, model width) are tuned for single-core runs.
struct PipelineConfig {
  // mining
  int tau = 4;
  double theta = 0.3;  // re-tuned for the bundled corpus; the library default is 0.4
  double s = 0.3;
  bool smooth_enabled = true;
  // loss weights
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double lambda3 = 0.17;  // stronger background sparsity suits the short noisy videos
  double beta = 0.5;
  double margin = 1.0;
  double topk_ratio = 0.125;
  // model
  int hidden_dim = 32;
  int context_radius = 1;
  // optimization
  double learning_rate = 5e-5;
  double loc_lr_multiplier = 10.0;
  int iterations = 500;
  int loc_iterations = 1000;
  int batch_size = 8;
  std::uint64_t seed = 0;
  // post-processing
  double nms_iou = 0.5;
  double class_threshold = 0.1;
  double outer_margin_ratio = 0.25;
  // corpus generation
  SynthConfig synth;
};

int parse_int_value(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw FormatError("config key " + key + ": not an integer: " + v);
  }
}

double parse_real_value(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw FormatError("config key " + key + ": not a number: " + v);
  }
}

bool parse_bool_value(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw FormatError("config key " + key + ": not a boolean: " + v);
}

void apply_config_kv(PipelineConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "tau") cfg.tau = parse_int_value(key, value);
    else if (key == "theta") cfg.theta = parse_real_value(key, value);
    else if (key == "s") cfg.s = parse_real_value(key, value);
    else if (key == "smooth_enabled") cfg.smooth_enabled = parse_bool_value(key, value);
    else if (key == "lambda1") cfg.lambda1 = parse_real_value(key, value);
    else if (key == "lambda2") cfg.lambda2 = parse_real_value(key, value);
    else if (key == "lambda3") cfg.lambda3 = parse_real_value(key, value);
    else if (key == "beta") cfg.beta = parse_real_value(key, value);
    else if (key == "margin") cfg.margin = parse_real_value(key, value);
    else if (key == "topk_ratio") cfg.topk_ratio = parse_real_value(key, value);
    else if (key == "hidden_dim") cfg.hidden_dim = parse_int_value(key, value);
    else if (key == "context_radius") cfg.context_radius = parse_int_value(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_real_value(key, value);
    else if (key == "loc_lr_multiplier") cfg.loc_lr_multiplier = parse_real_value(key, value);
    else if (key == "iterations") cfg.iterations = parse_int_value(key, value);
    else if (key == "loc_iterations") cfg.loc_iterations = parse_int_value(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_int_value(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int_value(key, value));
    else if (key == "nms_iou") cfg.nms_iou = parse_real_value(key, value);
    else if (key == "class_threshold") cfg.class_threshold = parse_real_value(key, value);
    else if (key == "outer_margin_ratio") cfg.outer_margin_ratio = parse_real_value(key, value);
    else if (key == "num_videos") cfg.synth.num_videos = parse_int_value(key, value);
    else if (key == "num_classes") cfg.synth.num_classes = parse_int_value(key, value);
    else if (key == "dim") cfg.synth.dim = parse_int_value(key, value);
    else if (key == "min_t") cfg.synth.min_t = parse_int_value(key, value);
    else if (key == "max_t") cfg.synth.max_t = parse_int_value(key, value);
    else if (key == "slow_fraction") cfg.synth.slow_fraction = parse_real_value(key, value);
    else if (key == "stretch_factor") cfg.synth.stretch_factor = parse_int_value(key, value);
    else if (key == "slow_amplitude") cfg.synth.slow_amplitude = parse_real_value(key, value);
    else if (key == "context_fraction") cfg.synth.context_fraction = parse_real_value(key, value);
    else if (key == "context_amplitude") cfg.synth.context_amplitude = parse_real_value(key, value);
    else if (key == "noise_sigma") cfg.synth.noise_sigma = parse_real_value(key, value);
    else if (key == "snippet_seconds") cfg.synth.snippet_seconds = parse_real_value(key, value);
    else throw FormatError("config: unknown key " + key);
  }
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig cfg;
  if (!path.empty()) apply_config_kv(cfg, read_kv(path));
  cfg.synth.seed = cfg.seed;
  return cfg;
}

std::map<std::string, std::string> config_snapshot(const PipelineConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["tau"] = std::to_string(cfg.tau);
  kv["theta"] = format_double(cfg.theta);
  kv["s"] = format_double(cfg.s);
  kv["smooth_enabled"] = cfg.smooth_enabled ? "1" : "0";
  kv["lambda1"] = format_double(cfg.lambda1);
  kv["lambda2"] = format_double(cfg.lambda2);
  kv["lambda3"] = format_double(cfg.lambda3);
  kv["beta"] = format_double(cfg.beta);
  kv["margin"] = format_double(cfg.margin);
  kv["topk_ratio"] = format_double(cfg.topk_ratio);
  kv["hidden_dim"] = std::to_string(cfg.hidden_dim);
  kv["context_radius"] = std::to_string(cfg.context_radius);
  kv["learning_rate"] = format_double(cfg.learning_rate);
  kv["loc_lr_multiplier"] = format_double(cfg.loc_lr_multiplier);
  kv["iterations"] = std::to_string(cfg.iterations);
  kv["loc_iterations"] = std::to_string(cfg.loc_iterations);
  kv["batch_size"] = std::to_string(cfg.batch_size);
  kv["seed"] = std::to_string(cfg.seed);
  kv["nms_iou"] = format_double(cfg.nms_iou);
  kv["class_threshold"] = format_double(cfg.class_threshold);
  kv["outer_margin_ratio"] = format_double(cfg.outer_margin_ratio);
  kv["num_videos"] = std::to_string(cfg.synth.num_videos);
  kv["num_classes"] = std::to_string(cfg.synth.num_classes);
  kv["dim"] = std::to_string(cfg.synth.dim);
  kv["min_t"] = std::to_string(cfg.synth.min_t);
  kv["max_t"] = std::to_string(cfg.synth.max_t);
  kv["slow_fraction"] = format_double(cfg.synth.slow_fraction);
  kv["stretch_factor"] = std::to_string(cfg.synth.stretch_factor);
  kv["slow_amplitude"] = format_double(cfg.synth.slow_amplitude);
  kv["context_fraction"] = format_double(cfg.synth.context_fraction);
  kv["context_amplitude"] = format_double(cfg.synth.context_amplitude);
  kv["noise_sigma"] = format_double(cfg.synth.noise_sigma);
  kv["snippet_seconds"] = format_double(cfg.synth.snippet_seconds);
  return kv;
}

LossWeights loss_weights_of(const PipelineConfig& cfg) {
  LossWeights w;
  w.lambda1 = cfg.lambda1;
  w.lambda2 = cfg.lambda2;
  w.lambda3 = cfg.lambda3;
  w.beta = cfg.beta;
  w.margin = cfg.margin;
  return w;
}

MiningConfig mining_config_of(const PipelineConfig& cfg) {
  MiningConfig m;
  m.tau = cfg.tau;
  m.theta = cfg.theta;
  m.s = cfg.s;
  m.smooth_enabled = cfg.smooth_enabled;
  return m;
}

PostprocessConfig postprocess_config_of(const PipelineConfig& cfg) {
  PostprocessConfig p;
  p.nms_iou = cfg.nms_iou;
  p.class_threshold = cfg.class_threshold;
  p.outer_margin_ratio = cfg.outer_margin_ratio;
  p.topk_ratio = cfg.topk_ratio;
  return p;
}

/// Run fn(0..n-1) on a pool of `jobs` threads; the first exception wins and
/// is rethrown after all workers drain. Callers write results by index so
/// output order never depends on scheduling.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < std::min(jobs, n); ++w) workers.emplace_back(worker);
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

Corpus subsampled_corpus(const Corpus& corpus, int tau) {
  Corpus out;
  out.num_classes = corpus.num_classes;
  out.snippet_seconds = corpus.snippet_seconds;
  out.videos.reserve(corpus.videos.size());
  for (const CorpusVideo& v : corpus.videos) {
    CorpusVideo sub = v;
    try {
      sub.features = subsample(v.features, tau);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("video " + v.id + ": " + e.what());
    }
    out.videos.push_back(std::move(sub));
  }
  return out;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
  const PipelineConfig cfg = load_config(config_path);
  const std::vector<SynthVideo> videos = generate(cfg.synth);
  const Corpus corpus = make_corpus(cfg.synth, videos);
  write_corpus(out_dir, corpus);
  int slow = 0, total = 0;
  for (const SynthVideo& v : videos)
    for (const GroundTruthSegment& g : v.gts) {
      ++total;
      if (g.slow_motion) ++slow;
    }
  std::cout << "wrote " << videos.size() << " videos (" << total << " instances, " << slow
            << " slow) to " << out_dir << "\n";
  return 0;
}

int cmd_train_miner(const std::string& config_path, const std::string& corpus_dir,
                    const std::string& run_dir) {
  const PipelineConfig cfg = load_config(config_path);
  const Corpus corpus = read_corpus(corpus_dir);
  if (corpus.videos.empty()) throw std::invalid_argument("train-miner: corpus has no videos");
  const Corpus sub = subsampled_corpus(corpus, cfg.tau);
  const int dim = sub.videos.front().features.dim();
  const BackboneParams init =
      init_params(dim, cfg.hidden_dim, corpus.num_classes, cfg.context_radius,
                  Rng::mix(cfg.seed, kMinerInitStream));
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.iterations = cfg.iterations;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.topk_ratio = cfg.topk_ratio;
  const TrainResult result = train(init, sub, loss_weights_of(cfg), tc);
  write_train_run(run_dir, result.params, result.loss_curve, config_snapshot(cfg));
  std::cout << "miner trained, " << result.loss_curve.size() << " iterations, final loss "
            << (result.loss_curve.empty() ? 0.0 : result.loss_curve.back()) << ", run at "
            << run_dir << "\n";
  return 0;
}

int cmd_gen_masks(const std::string& config_path, const std::string& miner_ckpt,
                  const std::string& corpus_dir, const std::string& out_file, int jobs) {
  const PipelineConfig cfg = load_config(config_path);
  const BackboneParams miner = load_params(miner_ckpt);
  const Corpus corpus = read_corpus(corpus_dir);
  const MiningConfig mc = mining_config_of(cfg);
  std::vector<std::pair<std::string, std::vector<int>>> masks(corpus.videos.size());
  parallel_for(static_cast<int>(corpus.videos.size()), jobs, [&](int i) {
    const CorpusVideo& v = corpus.videos[i];
    try {
      masks[i] = {v.id, generate_mask(miner, v.features, mc).bits};
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("video " + v.id + ": " + e.what());
    }
  });
  write_masks(out_file, masks);
  std::cout << "wrote masks for " << masks.size() << " videos to " << out_file << "\n";
  return 0;
}

int cmd_train_loc(const std::string& config_path, const std::string& corpus_dir,
                  const std::string& masks_file, const std::string& run_dir,
                  double beta_override) {
  PipelineConfig cfg = load_config(config_path);
  if (beta_override >= 0.0) cfg.beta = beta_override;
  const Corpus corpus = read_corpus(corpus_dir);
  if (corpus.videos.empty()) throw std::invalid_argument("train-loc: corpus has no videos");
  const std::map<std::string, std::vector<int>> masks = read_masks(masks_file);
  const int dim = corpus.videos.front().features.dim();

  LocalizerState init;
  init.n_params = init_params(dim, cfg.hidden_dim, corpus.num_classes, cfg.context_radius,
                              Rng::mix(cfg.seed, kNBranchInitStream));
  init.s_params = init_params(dim, cfg.hidden_dim, corpus.num_classes, cfg.context_radius,
                              Rng::mix(cfg.seed, kSBranchInitStream));
  init.loss_weights = loss_weights_of(cfg);

  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate * cfg.loc_lr_multiplier;
  tc.iterations = cfg.loc_iterations;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.topk_ratio = cfg.topk_ratio;

  LocalizerTrainer trainer(init, tc);
  const std::vector<double> curve = trainer.train(corpus, masks);
  save_localizer(run_dir, trainer.state());
  write_loss_curve(run_dir + "/loss.csv", curve);
  write_kv(run_dir + "/config.cfg", config_snapshot(cfg));
  std::cout << "localizer trained, " << curve.size() << " iterations, final loss "
            << (curve.empty() ? 0.0 : curve.back()) << ", run at " << run_dir << "\n";
  return 0;
}

int cmd_infer(const std::string& config_path, const std::string& loc_dir,
              const std::string& corpus_dir, const std::string& out_csv,
              const std::string& mode_name, int jobs) {
  const PipelineConfig cfg = load_config(config_path);
  const LocalizerState state = load_localizer(loc_dir);
  const Corpus corpus = read_corpus(corpus_dir);
  const InferMode mode = parse_infer_mode(mode_name);
  const PostprocessConfig pc = postprocess_config_of(cfg);

  std::vector<std::vector<ProposalRecord>> per_video(corpus.videos.size());
  parallel_for(static_cast<int>(corpus.videos.size()), jobs, [&](int i) {
    const CorpusVideo& v = corpus.videos[i];
    const InferResult r = infer_combo(state, v.features, mode);
    const std::vector<Proposal> props = nms(generate(r.cas, r.attn, pc), pc.nms_iou);
    std::vector<ProposalRecord> rows;
    rows.reserve(props.size());
    for (const Proposal& p : props)
      rows.push_back(ProposalRecord{v.id, p.class_id, p.start * corpus.snippet_seconds,
                                    p.end * corpus.snippet_seconds, p.confidence});
    per_video[i] = std::move(rows);
  });
  std::vector<ProposalRecord> all;
  for (const auto& rows : per_video) all.insert(all.end(), rows.begin(), rows.end());
  write_proposals_csv(out_csv, all);
  std::cout << "wrote " << all.size() << " proposals to " << out_csv << "\n";
  return 0;
}

int cmd_eval(const std::string& props_csv, const std::string& ann_file, bool slow_only,
             const std::string& band_name) {
  const std::vector<ProposalRecord> rows = read_proposals_csv(props_csv);
  const std::map<std::string, VideoAnnotation> ann = read_annotations(ann_file);

  std::vector<ScoredDetection> dets;
  dets.reserve(rows.size());
  for (const ProposalRecord& r : rows)
    dets.push_back(ScoredDetection{r.video_id, r.class_id, r.start_sec, r.end_sec,
                                   r.confidence});
  std::vector<GroundTruthSegment> gts;
  for (const auto& [id, a] : ann) gts.insert(gts.end(), a.gts.begin(), a.gts.end());
  if (slow_only) gts = slow_subset_filter(gts);

  std::vector<BandSpec> bands;
  if (band_name == "thumos") bands = {thumos_band()};
  else if (band_name == "anet") bands = {anet_band()};
  else if (band_name == "all") bands = default_bands();
  else throw CLI::ValidationError("--band", "must be thumos, anet or all");

  const MapReport report = map_bands(dets, gts, bands);
  std::cout << format_map_table(report);
  return 0;
}

const char* kPlotColors[8] = {"#c23b22", "#1f6fb2", "#2e8b57", "#b8860b",
                              "#7b4fa6", "#00808c", "#a0522d", "#556b2f"};

std::string svg_polyline(const std::vector<double>& values, double x0, double y0, double w,
                         double h, double vmin, double vmax, const std::string& color,
                         bool dashed) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
  if (dashed) os << " stroke-dasharray=\"4 3\"";
  os << " points=\"";
  const int n = static_cast<int>(values.size());
  for (int t = 0; t < n; ++t) {
    const double x = n > 1 ? x0 + w * t / (n - 1) : x0 + w / 2;
    const double frac = vmax > vmin ? (values[t] - vmin) / (vmax - vmin) : 0.5;
    const double y = y0 + h - h * frac;
    os << x << "," << y << " ";
  }
  os << "\"/>\n";
  return os.str();
}

int cmd_plot_cas(const std::string& loc_dir, const std::string& corpus_dir,
                 const std::string& video_id, const std::string& masks_file,
                 const std::string& out_svg) {
  const LocalizerState state = load_localizer(loc_dir);
  const Corpus corpus = read_corpus(corpus_dir);
  const CorpusVideo* video = nullptr;
  for (const CorpusVideo& v : corpus.videos)
    if (v.id == video_id) video = &v;
  if (video == nullptr)
    throw std::invalid_argument("plot-cas: video " + video_id + " not in corpus");

  const InferResult r = infer(state, video->features);
  const int t_len = r.cas.length();
  const int n_act = r.cas.num_classes();

  std::vector<int> mask_bits;
  if (!masks_file.empty()) {
    const auto masks = read_masks(masks_file);
    auto it = masks.find(video_id);
    if (it == masks.end())
      throw std::invalid_argument("plot-cas: no mask for video " + video_id);
    mask_bits = it->second;
  }

  const double width = 900, height = 320, margin = 45;
  const double pw = width - 2 * margin, ph = height - 2 * margin;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (!mask_bits.empty()) {
    for (int t = 0; t < std::min<int>(t_len, mask_bits.size()); ++t) {
      if (mask_bits[t] == 0) continue;
      const double x = t_len > 1 ? margin + pw * t / (t_len - 1) : margin;
      const double bar = t_len > 1 ? pw / (t_len - 1) : pw;
      svg << "<rect x=\"" << x - bar / 2 << "\" y=\"" << margin << "\" width=\"" << bar
          << "\" height=\"" << ph << "\" fill=\"#d9e8f5\"/>\n";
    }
  }
  svg << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";

  std::vector<double> track(t_len);
  for (int c = 0; c < n_act; ++c) {
    for (int t = 0; t < t_len; ++t) track[t] = sigmoid(r.cas.logits(t, c));
    svg << svg_polyline(track, margin, margin, pw, ph, 0.0, 1.0,
                        kPlotColors[c % 8], false);
    svg << "<text x=\"" << margin + 8 << "\" y=\"" << margin + 16 + 14 * c << "\" fill=\""
        << kPlotColors[c % 8] << "\" font-size=\"11\">class " << c << "</text>\n";
  }
  for (int t = 0; t < t_len; ++t) track[t] = r.attn.at(t, Branch::kInstance);
  svg << svg_polyline(track, margin, margin, pw, ph, 0.0, 1.0, "#222222", true);
  svg << "<text x=\"" << margin + 8 << "\" y=\"" << margin + 16 + 14 * n_act
      << "\" fill=\"#222222\" font-size=\"11\">instance attention (dashed)</text>\n";
  svg << "<text x=\"" << margin << "\" y=\"" << margin - 12
      << "\" fill=\"#000\" font-size=\"13\">per-class activation, video " << video_id
      << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw std::invalid_argument("plot-cas: cannot open " + out_svg);
  out << svg.str();
  std::cout << "wrote " << out_svg << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, int triples) {
  const GradCheckResult r = gradient_check(seed, triples);
  std::printf("gradcheck: %d triples, %ld gradients, max rel err %.3e (tolerance %.1e): %s\n",
              r.triples, r.params_checked, r.max_rel_err, r.tolerance,
              r.passed ? "pass" : "FAIL");
  return r.passed ? 0 : 3;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Slow-motion-aware weakly supervised temporal action localization toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, corpus_dir, run_dir, miner_ckpt, out_file, loc_dir;
  std::string props_csv, ann_file, video_id, masks_file, mode_name = "full";
  std::string band_name = "all";
  double beta_override = -1.0;
  bool slow_only = false;
  int jobs = 1;
  std::uint64_t gc_seed = 0;
  int gc_triples = 20;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--config", config_path, "key=value config file");
  synth->add_option("--out", out_dir, "output corpus directory")->required();

  CLI::App* tm = app.add_subcommand("train-miner", "train the mining backbone");
  tm->add_option("--config", config_path, "key=value config file");
  tm->add_option("--corpus", corpus_dir, "corpus directory")->required();
  tm->add_option("--out", run_dir, "run directory")->required();

  CLI::App* gm = app.add_subcommand("gen-masks", "generate slow-motion masks");
  gm->add_option("--config", config_path, "key=value config file");
  gm->add_option("--miner", miner_ckpt, "miner checkpoint")->required();
  gm->add_option("--corpus", corpus_dir, "corpus directory")->required();
  gm->add_option("--out", out_file, "mask file")->required();
  gm->add_option("--jobs", jobs, "worker threads");

  CLI::App* tl = app.add_subcommand("train-loc", "train the two-branch localizer");
  tl->add_option("--config", config_path, "key=value config file");
  tl->add_option("--corpus", corpus_dir, "corpus directory")->required();
  tl->add_option("--masks", masks_file, "mask file")->required();
  tl->add_option("--out", run_dir, "run directory")->required();
  tl->add_option("--beta", beta_override, "slow-branch share of the separation loss");

  CLI::App* inf = app.add_subcommand("infer", "run inference and write proposals");
  inf->add_option("--config", config_path, "key=value config file");
  inf->add_option("--loc", loc_dir, "localizer run directory")->required();
  inf->add_option("--corpus", corpus_dir, "corpus directory")->required();
  inf->add_option("--out", out_file, "proposal CSV")->required();
  inf->add_option("--mode", mode_name, "full | n_only | s_only | combo");
  inf->add_option("--jobs", jobs, "worker threads");

  CLI::App* ev = app.add_subcommand("eval", "score proposals against annotations");
  ev->add_option("--props", props_csv, "proposal CSV")->required();
  ev->add_option("--ann", ann_file, "annotation file")->required();
  ev->add_flag("--slow-only", slow_only, "restrict to slow-motion ground truth");
  ev->add_option("--band", band_name, "thumos | anet | all");

  CLI::App* pc = app.add_subcommand("plot-cas", "plot per-class activations as SVG");
  pc->add_option("--loc", loc_dir, "localizer run directory")->required();
  pc->add_option("--corpus", corpus_dir, "corpus directory")->required();
  pc->add_option("--video", video_id, "video id")->required();
  pc->add_option("--masks", masks_file, "mask file for the overlay");
  pc->add_option("--out", out_file, "output SVG path")->required();

  CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gc->add_option("--seed", gc_seed, "random seed");
  gc->add_option("--triples", gc_triples, "number of random triples");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(config_path, out_dir);
    if (tm->parsed()) return cmd_train_miner(config_path, corpus_dir, run_dir);
    if (gm->parsed()) return cmd_gen_masks(config_path, miner_ckpt, corpus_dir, out_file, jobs);
    if (tl->parsed())
      return cmd_train_loc(config_path, corpus_dir, masks_file, run_dir, beta_override);
    if (inf->parsed())
      return cmd_infer(config_path, loc_dir, corpus_dir, out_file, mode_name, jobs);
    if (ev->parsed()) return cmd_eval(props_csv, ann_file, slow_only, band_name);
    if (pc->parsed()) return cmd_plot_cas(loc_dir, corpus_dir, video_id, masks_file, out_file);
    if (gc->parsed()) return cmd_gradcheck(gc_seed, gc_triples);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace smen
