#ifndef DPPDYN_PAPANGELOU_HPP
#define DPPDYN_PAPANGELOU_HPP

#include <Eigen/Dense>
#include <vector>

#include "dppdyn/configuration.hpp"
#include "dppdyn/kernel.hpp"

namespace dppdyn {

/// Pivots and intensities below this value are treated as exact zeros; this
/// defines the indicator sets {r > 0} used by the rate families.
constexpr double kZeroThreshold = 1e-12;

/// Conditional intensity r(x, gamma) = det J_{gamma + x} / det J_gamma for
/// x outside gamma, evaluated as the Schur complement
/// J_xx - J_{x,gamma} J_gamma^{-1} J_{gamma,x}. Returns 0 when det J_gamma
/// vanishes (pivot below threshold). r(x, empty) = J(x,x).
double intensity(const InteractionOperator& j, const Configuration& gamma, int x);

/// Per-site intensities at a fixed configuration: value[x] = r(x, gamma) for
/// unoccupied x, and r(x, gamma \ x) for occupied x.
struct IntensityProfile {
  Eigen::VectorXd value;
  bool singular = false; // det J_gamma below pivot threshold; all values 0
};

IntensityProfile intensity_profile(const InteractionOperator& j,
                                   const Configuration& gamma);

/// Everything the exchange rates need at configuration gamma:
/// occupied[x] = r(x, gamma\x), free_given_gamma[y] = r(y, gamma), and
/// free_given_removed(y, x) = r(y, gamma\x) for occupied x, unoccupied y.
struct PairIntensityContext {
  Eigen::VectorXd occupied;
  Eigen::VectorXd free_given_gamma;
  Eigen::MatrixXd free_given_removed;
  bool singular = false;
};

PairIntensityContext pair_intensity_context(const InteractionOperator& j,
                                            const Configuration& gamma);

/// max over unoccupied sites of r(x, gamma) - J(x,x); nonpositive up to
/// roundoff. 0 for the fully occupied configuration.
double bound_check(const InteractionOperator& j, const Configuration& gamma);

/// Maintains the Cholesky factor of J_gamma across single-site moves of a
/// trajectory worker: births extend the factor, deaths remove a row via a
/// rank-one update of the trailing block. Not thread-safe; one tracker per
/// trajectory.
class CholeskyTracker {
public:
  explicit CholeskyTracker(const InteractionOperator& j);

  void reset(const Configuration& gamma);
  const Configuration& configuration() const { return gamma_; }
  bool singular() const { return singular_; }

  void apply_birth(int x);
  void apply_death(int x);
  void apply_hop(int x, int y); // death at x, then birth at y

  IntensityProfile profile() const;
  PairIntensityContext pair_context() const;

  /// max |L L^T - J_gamma| over the active block.
  double factor_residual() const;

  /// From-scratch pivoted refactorization of the current configuration.
  void refactor();
  long long refactor_count() const { return refactor_count_; }

private:
  void factorize_pivoted();
  Eigen::MatrixXd inverse_factor() const; // L^{-1}, lower triangular

  const InteractionOperator* j_;
  Configuration gamma_;
  std::vector<int> order_; // active sites in factor order
  std::vector<int> pos_;   // site -> position in order_, or -1
  Eigen::MatrixXd l_;      // capacity n x n; leading m x m block in use
  int active_ = 0;
  bool singular_ = false;
  long long refactor_count_ = 0;
};

} // namespace dppdyn

#endif
