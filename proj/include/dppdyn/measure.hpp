#ifndef DPPDYN_MEASURE_HPP
#define DPPDYN_MEASURE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dppdyn/configuration.hpp"
#include "dppdyn/kernel.hpp"

namespace dppdyn {

constexpr int kDefaultEnumerationLimit = 14;

/// Exact law of the determinantal process on the full 2^n state space,
/// indexed by occupancy bitmask.
class MeasureTable {
public:
  MeasureTable(int n, std::vector<double> probabilities);

  int n() const { return n_; }
  std::uint64_t states() const { return prob_.size(); }
  double prob(std::uint64_t mask) const { return prob_[mask]; }
  const std::vector<double>& probabilities() const { return prob_; }
  double sum() const;

  /// Total mass of the particle-number sector |gamma| = m.
  double sector_mass(int m) const;
  /// Conditional law on the sector, indexed by mask (zero outside the
  /// sector). Throws if the sector has no mass.
  std::vector<double> sector_conditional(int m) const;

private:
  int n_;
  std::vector<double> prob_;
};

/// P(gamma) = det(L_gamma) / det(I + L) with L = D^{1/2} J D^{1/2};
/// det of the empty matrix is 1, so P(empty) = 1 / det(I + L).
double config_probability(const InteractionOperator& j, const Configuration& gamma);

/// Brute-force table over all 2^n subsets. Throws EnumerationLimitError
/// when n exceeds the limit.
MeasureTable exact_distribution(const InteractionOperator& j,
                                int enumeration_limit = kDefaultEnumerationLimit);

/// Two-sided evaluation of the Mecke identity for a bounded test function
/// F(x, gamma):
///   lhs = E_mu[ sum_{x in gamma} F(x, gamma) ]
///   rhs = E_mu[ sum_{x not in gamma} nu_x r(x, gamma) F(x, gamma + x) ]
/// The nu-sum on the right runs over unoccupied sites only, the finite-space
/// image of the continuum where occupied sites form a nu-null set.
struct MeckeResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

using SiteConfigFunction = std::function<double(int, const Configuration&)>;

MeckeResult mecke_check(const InteractionOperator& j, const SiteConfigFunction& f,
                        int enumeration_limit = kDefaultEnumerationLimit);

/// Total variation distance between two distributions on the same index set.
double total_variation(std::span<const double> p, std::span<const double> q);

} // namespace dppdyn

#endif
