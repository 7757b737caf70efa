#include "doctest.h"

#include "smen/cli.hpp"
#include "smen/dataio.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace smen;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "smen_test_cli";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& rel) const { return (path / rel).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Small enough to train in well under a second; everything else stays at the
// built-in defaults so the config file also exercises partial overrides.
const char* kTinyConfig =
    "num_videos=8\n"
    "num_classes=2\n"
    "dim=10\n"
    "min_t=50\n"
    "max_t=60\n"
    "hidden_dim=8\n"
    "iterations=8\n"
    "loc_iterations=8\n"
    "batch_size=2\n"
    "seed=5\n";

}  // namespace

TEST_CASE("cli full pipeline smoke test") {
  TempDir tmp;
  const std::string cfg = tmp.str("tiny.cfg");
  write_text(cfg, kTinyConfig);

  const std::string corpus = tmp.str("corpus");
  CHECK(run_cli({"synth", "--config", cfg, "--out", corpus}) == 0);
  CHECK(fs::exists(corpus + "/manifest.txt"));
  CHECK(fs::exists(corpus + "/annotations.txt"));
  CHECK(fs::exists(corpus + "/features/v0000.feat"));

  const std::string miner = tmp.str("miner");
  CHECK(run_cli({"train-miner", "--config", cfg, "--corpus", corpus, "--out", miner}) == 0);
  CHECK(fs::exists(miner + "/params.ckpt"));
  CHECK(fs::exists(miner + "/loss.csv"));
  CHECK(fs::exists(miner + "/config.cfg"));

  const std::string masks = tmp.str("masks.tsv");
  CHECK(run_cli({"gen-masks", "--config", cfg, "--miner", miner + "/params.ckpt",
                 "--corpus", corpus, "--out", masks}) == 0);
  const auto mask_map = read_masks(masks);
  CHECK(mask_map.size() == 8);
  CHECK(mask_map.count("v0000") == 1);

  const std::string loc = tmp.str("loc");
  CHECK(run_cli({"train-loc", "--config", cfg, "--corpus", corpus, "--masks", masks,
                 "--out", loc}) == 0);
  CHECK(fs::exists(loc + "/n_branch.ckpt"));
  CHECK(fs::exists(loc + "/s_branch.ckpt"));
  CHECK(fs::exists(loc + "/weights.cfg"));

  const std::string props = tmp.str("props.csv");
  CHECK(run_cli({"infer", "--config", cfg, "--loc", loc, "--corpus", corpus,
                 "--out", props}) == 0);
  CHECK(fs::exists(props));

  CHECK(run_cli({"eval", "--props", props, "--ann", corpus + "/annotations.txt"}) == 0);
  CHECK(run_cli({"eval", "--props", props, "--ann", corpus + "/annotations.txt",
                 "--band", "thumos"}) == 0);
  CHECK(run_cli({"eval", "--props", props, "--ann", corpus + "/annotations.txt",
                 "--slow-only"}) == 0);

  const std::string svg = tmp.str("cas.svg");
  CHECK(run_cli({"plot-cas", "--loc", loc, "--corpus", corpus, "--video", "v0000",
                 "--masks", masks, "--out", svg}) == 0);
  const std::string svg_text = read_text(svg);
  CHECK(svg_text.find("<svg") != std::string::npos);
  CHECK(svg_text.find("</svg>") != std::string::npos);
}

TEST_CASE("cli inference is deterministic across runs and thread counts") {
  TempDir tmp;
  const std::string cfg = tmp.str("tiny.cfg");
  write_text(cfg, kTinyConfig);
  const std::string corpus = tmp.str("corpus");
  REQUIRE(run_cli({"synth", "--config", cfg, "--out", corpus}) == 0);
  const std::string miner = tmp.str("miner");
  REQUIRE(run_cli({"train-miner", "--config", cfg, "--corpus", corpus, "--out", miner}) == 0);

  const std::string m1 = tmp.str("m1.tsv");
  const std::string m2 = tmp.str("m2.tsv");
  REQUIRE(run_cli({"gen-masks", "--config", cfg, "--miner", miner + "/params.ckpt",
                   "--corpus", corpus, "--out", m1, "--jobs", "1"}) == 0);
  REQUIRE(run_cli({"gen-masks", "--config", cfg, "--miner", miner + "/params.ckpt",
                   "--corpus", corpus, "--out", m2, "--jobs", "3"}) == 0);
  CHECK(read_text(m1) == read_text(m2));

  const std::string loc = tmp.str("loc");
  REQUIRE(run_cli({"train-loc", "--config", cfg, "--corpus", corpus, "--masks", m1,
                   "--out", loc}) == 0);

  const std::string p1 = tmp.str("p1.csv");
  const std::string p2 = tmp.str("p2.csv");
  REQUIRE(run_cli({"infer", "--config", cfg, "--loc", loc, "--corpus", corpus,
                   "--out", p1, "--jobs", "1"}) == 0);
  REQUIRE(run_cli({"infer", "--config", cfg, "--loc", loc, "--corpus", corpus,
                   "--out", p2, "--jobs", "4"}) == 0);
  CHECK(read_text(p1) == read_text(p2));

  // Every mode taps a defined slice of the two branches; all must run.
  for (const char* mode : {"full", "n_only", "s_only", "combo"}) {
    CHECK(run_cli({"infer", "--config", cfg, "--loc", loc, "--corpus", corpus,
                   "--out", tmp.str("mode.csv"), "--mode", mode}) == 0);
  }
}

TEST_CASE("cli train-loc --beta overrides the config value") {
  TempDir tmp;
  const std::string cfg = tmp.str("tiny.cfg");
  write_text(cfg, std::string(kTinyConfig) + "beta=0.5\n");
  const std::string corpus = tmp.str("corpus");
  REQUIRE(run_cli({"synth", "--config", cfg, "--out", corpus}) == 0);
  const std::string miner = tmp.str("miner");
  REQUIRE(run_cli({"train-miner", "--config", cfg, "--corpus", corpus, "--out", miner}) == 0);
  const std::string masks = tmp.str("masks.tsv");
  REQUIRE(run_cli({"gen-masks", "--config", cfg, "--miner", miner + "/params.ckpt",
                   "--corpus", corpus, "--out", masks}) == 0);

  const std::string loc = tmp.str("loc");
  REQUIRE(run_cli({"train-loc", "--config", cfg, "--corpus", corpus, "--masks", masks,
                   "--out", loc, "--beta", "0.9"}) == 0);
  const auto snapshot = read_kv(loc + "/config.cfg");
  CHECK(std::stod(snapshot.at("beta")) == 0.9);
  const auto weights = read_kv(loc + "/weights.cfg");
  CHECK(std::stod(weights.at("beta")) == 0.9);
}

TEST_CASE("cli usage errors exit 1") {
  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"frobnicate"}) == 1);
  CHECK(run_cli({"synth"}) == 1);                      // missing required --out
  CHECK(run_cli({"eval", "--props", "x.csv"}) == 1);   // missing required --ann
  CHECK(run_cli({"synth", "--out", "x", "--bogus"}) == 1);
}

TEST_CASE("cli help exits 0") {
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("cli data errors exit 2") {
  TempDir tmp;
  // Missing corpus directory.
  CHECK(run_cli({"train-miner", "--corpus", tmp.str("nowhere"), "--out", tmp.str("run")}) == 2);
  // Unknown config key.
  const std::string bad_cfg = tmp.str("bad.cfg");
  write_text(bad_cfg, "no_such_knob=1\n");
  CHECK(run_cli({"synth", "--config", bad_cfg, "--out", tmp.str("corpus")}) == 2);
  // Proposal CSV that is not one.
  const std::string not_csv = tmp.str("junk.csv");
  write_text(not_csv, "hello\n");
  const std::string ann = tmp.str("ann.txt");
  write_annotations(ann, {});
  CHECK(run_cli({"eval", "--props", not_csv, "--ann", ann}) == 2);
}

TEST_CASE("cli eval rejects unknown band names") {
  TempDir tmp;
  const std::string props = tmp.str("props.csv");
  write_proposals_csv(props, {});
  const std::string ann = tmp.str("ann.txt");
  write_annotations(ann, {});
  CHECK(run_cli({"eval", "--props", props, "--ann", ann, "--band", "all"}) == 0);
  CHECK(run_cli({"eval", "--props", props, "--ann", ann, "--band", "bogus"}) == 1);
}

TEST_CASE("cli infer rejects unknown mode names") {
  TempDir tmp;
  const std::string cfg = tmp.str("tiny.cfg");
  write_text(cfg, kTinyConfig);
  const std::string corpus = tmp.str("corpus");
  REQUIRE(run_cli({"synth", "--config", cfg, "--out", corpus}) == 0);
  const std::string miner = tmp.str("miner");
  REQUIRE(run_cli({"train-miner", "--config", cfg, "--corpus", corpus, "--out", miner}) == 0);
  const std::string masks = tmp.str("masks.tsv");
  REQUIRE(run_cli({"gen-masks", "--config", cfg, "--miner", miner + "/params.ckpt",
                   "--corpus", corpus, "--out", masks}) == 0);
  const std::string loc = tmp.str("loc");
  REQUIRE(run_cli({"train-loc", "--config", cfg, "--corpus", corpus, "--masks", masks,
                   "--out", loc}) == 0);
  CHECK(run_cli({"infer", "--config", cfg, "--loc", loc, "--corpus", corpus,
                 "--out", tmp.str("p.csv"), "--mode", "sideways"}) == 2);
}

TEST_CASE("cli plot-cas reports unknown videos") {
  TempDir tmp;
  const std::string cfg = tmp.str("tiny.cfg");
  write_text(cfg, kTinyConfig);
  const std::string corpus = tmp.str("corpus");
  REQUIRE(run_cli({"synth", "--config", cfg, "--out", corpus}) == 0);
  const std::string miner = tmp.str("miner");
  REQUIRE(run_cli({"train-miner", "--config", cfg, "--corpus", corpus, "--out", miner}) == 0);
  const std::string masks = tmp.str("masks.tsv");
  REQUIRE(run_cli({"gen-masks", "--config", cfg, "--miner", miner + "/params.ckpt",
                   "--corpus", corpus, "--out", masks}) == 0);
  const std::string loc = tmp.str("loc");
  REQUIRE(run_cli({"train-loc", "--config", cfg, "--corpus", corpus, "--masks", masks,
                   "--out", loc}) == 0);
  CHECK(run_cli({"plot-cas", "--loc", loc, "--corpus", corpus, "--video", "v9999",
                 "--out", tmp.str("x.svg")}) == 2);
}

TEST_CASE("cli gradcheck subcommand") {
  CHECK(run_cli({"gradcheck", "--seed", "7", "--triples", "3"}) == 0);
}
