#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace smen {

/// Input carried NaN/Inf where a finite value is required. A distinct type so
/// training loops can separate numeric blowups from plain usage mistakes.
struct NonFiniteError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles. Minimal on purpose: the pipeline only
/// needs storage, element access and a few reductions, all of which live in
/// the modules that use them.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::vector<double> column(int c) const;
  void fill(double v);
  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Per-snippet feature sequence, T rows by d feature dims.
struct FeatureSequence {
  Matrix data;
  double snippet_seconds = 16.0 / 25.0;

  int length() const { return data.rows(); }
  int dim() const { return data.cols(); }
};

/// Video-level multi-hot label over C action classes plus background.
/// Index C (the last bit) is the background class.
struct VideoLabel {
  std::vector<int> bits;

  int num_classes() const { return static_cast<int>(bits.size()) - 1; }
};

/// Class activation sequence: T x (C+1) logits, background in the last column.
struct Cas {
  Matrix logits;

  int length() const { return logits.rows(); }
  int num_classes() const { return logits.cols() - 1; }
};

enum class Branch { kInstance = 0, kContext = 1, kBackground = 2 };

/// Per-snippet likelihoods (instance, context, background); each row lies on
/// the probability simplex.
struct AttentionTriple {
  Matrix weights;  // T x 3

  int length() const { return weights.rows(); }
  double at(int t, Branch b) const { return weights(t, static_cast<int>(b)); }
};

/// Deterministic RNG with hand-rolled transforms so corpora and trainings
/// reproduce bit-exactly regardless of the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform01();                     // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  int uniform_int(int n);                 // [0, n)
  double normal();                        // standard normal, Box-Muller

  /// Derive an independent stream seed from (base, index).
  static std::uint64_t mix(std::uint64_t base, std::uint64_t index);

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Shared primitives.

/// Rescale v into [0,1] by (v-min)/(max-min). A constant vector maps to all
/// zeros: a flat track carries no activation evidence.
std::vector<double> min_max_normalize(const std::vector<double>& v);

/// Numerically stabilized softmax.
std::vector<double> softmax(const std::vector<double>& v);

/// Mean of the k largest entries.
double topk_mean(const std::vector<double>& v, int k);

double sigmoid(double x);

}  // namespace smen
