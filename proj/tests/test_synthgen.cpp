#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "smen/mining.hpp"
#include "smen/synthgen.hpp"

using namespace smen;

namespace {

double column_mean(const Matrix& m, int j) {
  double sum = 0.0;
  for (int t = 0; t < m.rows(); ++t) sum += m(t, j);
  return sum / m.rows();
}

double column_var(const Matrix& m, int j) {
  const double mean = column_mean(m, j);
  double var = 0.0;
  for (int t = 0; t < m.rows(); ++t) var += (m(t, j) - mean) * (m(t, j) - mean);
  return var / m.rows();
}

double mean_row_delta(const Matrix& m, const std::vector<int>& rows) {
  if (rows.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double sq = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      const double d = m(rows[i], j) - m(rows[i - 1], j);
      sq += d * d;
    }
    sum += std::sqrt(sq);
  }
  return sum / (rows.size() - 1);
}

int snippet_index(double seconds, double snippet_seconds) {
  return static_cast<int>(std::llround(seconds / snippet_seconds));
}

}  // namespace

TEST_CASE("class motifs are deterministic and normalized") {
  const Matrix a = class_motif(2, 32, 6, 77);
  const Matrix b = class_motif(2, 32, 6, 77);
  CHECK(a.data() == b.data());
  REQUIRE(a.rows() == 32);
  REQUIRE(a.cols() == 6);
  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(column_mean(a, j)) <= 1e-12);
    CHECK(std::abs(column_var(a, j) - 1.0) <= 1e-9);
  }

  const Matrix c = class_motif(2, 32, 6, 78);
  CHECK(a.data() != c.data());

  CHECK_THROWS_AS(class_motif(0, 1, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(class_motif(0, 8, 0, 1), std::invalid_argument);
}

TEST_CASE("distinct classes produce weakly correlated motifs") {
  const int length = 64;
  const int d = 8;
  for (int other = 1; other < 4; ++other) {
    const Matrix a = class_motif(0, length, d, 5);
    const Matrix b = class_motif(other, length, d, 5);
    double corr_sum = 0.0;
    for (int j = 0; j < d; ++j) {
      double dot = 0.0;
      for (int t = 0; t < length; ++t) dot += a(t, j) * b(t, j);
      corr_sum += std::abs(dot / length);  // columns are zero-mean unit-variance
    }
    CHECK(corr_sum / d < 0.5);
  }
}

TEST_CASE("stretch interpolates and factor one is the identity") {
  const Matrix m = class_motif(1, 8, 4, 3);
  CHECK(stretch(m, 1).data() == m.data());

  const Matrix s = stretch(m, 4);
  REQUIRE(s.rows() == 32);
  // Midpoint of the first interpolation interval.
  for (int j = 0; j < 4; ++j)
    CHECK(s(2, j) == doctest::Approx(0.5 * m(0, j) + 0.5 * m(1, j)).epsilon(1e-14));
  // The tail clamps at the final row.
  for (int j = 0; j < 4; ++j) CHECK(s(31, j) == m(7, j));

  CHECK_THROWS_AS(stretch(m, 0), std::invalid_argument);
}

TEST_CASE("subsampling a stretched motif recovers it exactly") {
  const Matrix m = class_motif(3, 9, 5, 11);
  for (int factor : {2, 4}) {
    const Matrix s = stretch(m, factor);
    FeatureSequence seq;
    seq.data = s;
    const FeatureSequence back = subsample(seq, factor);
    REQUIRE(back.length() == m.rows());
    CHECK(back.data.data() == m.data());
  }
}

TEST_CASE("stretching divides consecutive-row deltas by the factor") {
  const Matrix m = class_motif(0, 10, 6, 21);
  const Matrix s = stretch(m, 4);
  std::vector<int> all_m(m.rows()), all_s(s.rows());
  for (int i = 0; i < m.rows(); ++i) all_m[i] = i;
  for (int i = 0; i < s.rows(); ++i) all_s[i] = i;
  const double ratio = mean_row_delta(s, all_s) / mean_row_delta(m, all_m);
  // The interpolated steps are delta/4; the clamped tail contributes zeros.
  CHECK(ratio > 0.15);
  CHECK(ratio < 0.32);
}

TEST_CASE("generation is deterministic") {
  SynthConfig cfg;
  cfg.num_videos = 6;
  cfg.seed = 123;
  const std::vector<SynthVideo> a = generate(cfg);
  const std::vector<SynthVideo> b = generate(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].features.data.data() == b[i].features.data.data());
    CHECK(a[i].label.bits == b[i].label.bits);
    REQUIRE(a[i].gts.size() == b[i].gts.size());
    for (std::size_t g = 0; g < a[i].gts.size(); ++g) {
      CHECK(a[i].gts[g].class_id == b[i].gts[g].class_id);
      CHECK(a[i].gts[g].start_sec == b[i].gts[g].start_sec);
      CHECK(a[i].gts[g].end_sec == b[i].gts[g].end_sec);
      CHECK(a[i].gts[g].slow_motion == b[i].gts[g].slow_motion);
    }
  }
  CHECK(a[0].id == "v0000");
  CHECK(a[5].id == "v0005");
}

TEST_CASE("labels agree with planted ground truth") {
  SynthConfig cfg;
  cfg.num_videos = 20;
  cfg.seed = 9;
  const std::vector<SynthVideo> videos = generate(cfg);
  for (const SynthVideo& v : videos) {
    REQUIRE(!v.gts.empty());
    REQUIRE(static_cast<int>(v.label.bits.size()) == cfg.num_classes + 1);
    CHECK(v.label.bits.back() == 1);
    std::set<int> classes;
    for (const GroundTruthSegment& g : v.gts) {
      classes.insert(g.class_id);
      CHECK(g.video_id == v.id);
      CHECK(g.start_sec < g.end_sec);
      CHECK(g.start_sec >= 0.0);
      CHECK(g.end_sec <= v.features.length() * cfg.snippet_seconds + 1e-9);
    }
    for (int c = 0; c < cfg.num_classes; ++c)
      CHECK(v.label.bits[c] == (classes.count(c) ? 1 : 0));
    CHECK(v.features.length() >= cfg.min_t);
    CHECK(v.features.length() <= cfg.max_t);
    CHECK(v.features.data.all_finite());
  }
}

TEST_CASE("slow fraction tracks the configured rate") {
  SynthConfig cfg;
  cfg.num_videos = 40;
  cfg.seed = 0;
  const std::vector<SynthVideo> videos = generate(cfg);
  int slow = 0, total = 0;
  for (const SynthVideo& v : videos)
    for (const GroundTruthSegment& g : v.gts) {
      ++total;
      slow += g.slow_motion ? 1 : 0;
    }
  REQUIRE(total > 0);
  const double fraction = static_cast<double>(slow) / total;
  CHECK(fraction > cfg.slow_fraction - 0.1);
  CHECK(fraction < cfg.slow_fraction + 0.1);

  SynthConfig none = cfg;
  none.slow_fraction = 0.0;
  for (const SynthVideo& v : generate(none))
    for (const GroundTruthSegment& g : v.gts) CHECK_FALSE(g.slow_motion);
}

TEST_CASE("sub-sampled slow instances move like normal ones") {
  SynthConfig cfg;
  cfg.num_videos = 30;
  cfg.seed = 4;
  const std::vector<SynthVideo> videos = generate(cfg);

  double slow_sum = 0.0, normal_sum = 0.0;
  int slow_count = 0, normal_count = 0;
  for (const SynthVideo& v : videos) {
    for (const GroundTruthSegment& g : v.gts) {
      const int start = snippet_index(g.start_sec, cfg.snippet_seconds);
      const int len = snippet_index(g.end_sec, cfg.snippet_seconds) - start;
      std::vector<int> rows;
      if (g.slow_motion) {
        for (int t = start; t < start + len; t += cfg.stretch_factor) rows.push_back(t);
      } else {
        for (int t = start; t < start + len; ++t) rows.push_back(t);
      }
      if (rows.size() < 2) continue;
      const double delta = mean_row_delta(v.features.data, rows);
      if (g.slow_motion) {
        slow_sum += delta;
        ++slow_count;
      } else {
        normal_sum += delta;
        ++normal_count;
      }
    }
  }
  REQUIRE(slow_count > 0);
  REQUIRE(normal_count > 0);
  const double ratio = (slow_sum / slow_count) / (normal_sum / normal_count);
  // Stride-tau sampling restores the planted pace; the remaining gap is the
  // amplitude attenuation applied to slow instances.
  CHECK(ratio >= 0.8 * cfg.slow_amplitude);
  CHECK(ratio <= 1.25 * cfg.slow_amplitude);
}

TEST_CASE("slow instances carry attenuated feature magnitude") {
  SynthConfig cfg;
  cfg.num_videos = 30;
  cfg.seed = 9;
  const std::vector<SynthVideo> videos = generate(cfg);

  double slow_sq = 0.0, normal_sq = 0.0;
  long slow_n = 0, normal_n = 0;
  for (const SynthVideo& v : videos) {
    for (const GroundTruthSegment& g : v.gts) {
      const int start = snippet_index(g.start_sec, cfg.snippet_seconds);
      const int stop = snippet_index(g.end_sec, cfg.snippet_seconds);
      for (int t = start; t < stop; ++t)
        for (int j = 0; j < cfg.dim; ++j) {
          const double x = v.features.data(t, j);
          if (g.slow_motion) {
            slow_sq += x * x;
            ++slow_n;
          } else {
            normal_sq += x * x;
            ++normal_n;
          }
        }
    }
  }
  REQUIRE(slow_n > 0);
  REQUIRE(normal_n > 0);
  const double rms_ratio = std::sqrt((slow_sq / slow_n) / (normal_sq / normal_n));
  CHECK(rms_ratio >= 0.8 * cfg.slow_amplitude);
  CHECK(rms_ratio <= 1.2 * cfg.slow_amplitude);
}

TEST_CASE("generate validates its configuration") {
  SynthConfig cfg;
  cfg.num_videos = 0;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.min_t = 5;
  cfg.max_t = 5;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.stretch_factor = 1;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.slow_fraction = 1.5;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.noise_sigma = 0.0;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.slow_amplitude = 0.0;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.slow_amplitude = 1.5;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}

TEST_CASE("make_corpus repackages every field") {
  SynthConfig cfg;
  cfg.num_videos = 3;
  cfg.seed = 31;
  const std::vector<SynthVideo> videos = generate(cfg);
  const Corpus corpus = make_corpus(cfg, videos);
  CHECK(corpus.num_classes == cfg.num_classes);
  CHECK(corpus.snippet_seconds == cfg.snippet_seconds);
  REQUIRE(corpus.videos.size() == videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    CHECK(corpus.videos[i].id == videos[i].id);
    CHECK(corpus.videos[i].features.data.data() == videos[i].features.data.data());
    CHECK(corpus.videos[i].label.bits == videos[i].label.bits);
    CHECK(corpus.videos[i].gts.size() == videos[i].gts.size());
  }
}
