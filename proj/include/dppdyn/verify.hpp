#ifndef DPPDYN_VERIFY_HPP
#define DPPDYN_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dppdyn/kernel.hpp"
#include "dppdyn/measure.hpp"
#include "dppdyn/rates.hpp"

namespace dppdyn {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;     // observed residual / statistic
  double threshold = 0.0; // pass when value <= threshold (unless boolean check)
  std::string detail;
};

struct VerifyOptions {
  int mecke_functions = 50;
  int duality_pairs = 100;
  std::uint64_t seed = 7;
  int enumeration_limit = kDefaultEnumerationLimit;
};

/// Bounded pseudo-random test function F(x, gamma) in [-1, 1], deterministic
/// in (seed, x, occupancy mask).
SiteConfigFunction hash_test_function(std::uint64_t seed);

/// The invariant suite: kernel validity, normalization, density ratio,
/// Mecke identity, Papangelou bound, detailed balance (Kawasaki),
/// generator conservativity and reversibility, form/generator duality.
std::vector<CheckResult> run_verification(const KernelOperator& kernel,
                                          const InteractionOperator& j,
                                          const RateFamily& family,
                                          const VerifyOptions& options);

bool all_passed(const std::vector<CheckResult>& results);

} // namespace dppdyn

#endif
