#include "smen/tensorseq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smen {

namespace {
// Validated before the vector is sized, otherwise a negative count wraps to a
// huge allocation and the error surfaces as length_error instead.
std::size_t checked_cell_count(int rows, int cols) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("Matrix: negative dimensions");
  }
  return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
}
}  // namespace

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(checked_cell_count(rows, cols), fill) {}

std::vector<double> Matrix::column(int c) const {
  std::vector<double> out(rows_);
  for (int r = 0; r < rows_; ++r) {
    out[r] = (*this)(r, c);
  }
  return out;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(seed) {
  // Warm up so small seeds diverge immediately.
  splitmix64(state_);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Box-Muller on two fresh uniforms; cache the second variate.
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * 3.14159265358979323846 * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::mix(std::uint64_t base, std::uint64_t index) {
  std::uint64_t x = base ^ (index * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL);
  return splitmix64(x);
}

std::vector<double> min_max_normalize(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("min_max_normalize: empty input");
  double lo = v[0];
  double hi = v[0];
  for (double x : v) {
    if (!std::isfinite(x)) throw NonFiniteError("min_max_normalize: non-finite input");
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<double> out(v.size(), 0.0);
  if (hi > lo) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = (v[i] - lo) / span;
    }
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("softmax: empty input");
  double hi = v[0];
  for (double x : v) {
    if (!std::isfinite(x)) throw NonFiniteError("softmax: non-finite input");
    hi = std::max(hi, x);
  }
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - hi);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

double topk_mean(const std::vector<double>& v, int k) {
  if (k < 1 || k > static_cast<int>(v.size())) {
    throw std::invalid_argument("topk_mean: k out of range");
  }
  std::vector<double> tmp(v);
  std::nth_element(tmp.begin(), tmp.begin() + (k - 1), tmp.end(), std::greater<double>());
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += tmp[i];
  return sum / k;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace smen
