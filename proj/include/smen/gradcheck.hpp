#pragma once

#include <cstdint>

namespace smen {

struct GradCheckResult {
  int triples = 0;
  long params_checked = 0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Compare every analytic parameter gradient of the total loss against
/// central finite differences on randomly drawn (params, input, label)
/// triples with sequence lengths cycling through {1, 3, 8}. The relative
/// error uses max(|analytic|, |numeric|, 0.01) as denominator so
/// finite-difference noise on near-zero gradients cannot dominate.
GradCheckResult gradient_check(std::uint64_t seed, int num_triples = 20,
                               double step = 1e-6, double tolerance = 1e-4);

}  // namespace smen
