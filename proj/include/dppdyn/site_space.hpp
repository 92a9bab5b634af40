#ifndef DPPDYN_SITE_SPACE_HPP
#define DPPDYN_SITE_SPACE_HPP

#include <Eigen/Dense>
#include <vector>

namespace dppdyn {

enum class WeightRule { Uniform, Midpoint };

/// Finite weighted site set: positions x_i with strictly positive quadrature
/// weights nu_i. Integrals over the base space become weighted sums
/// sum_i f(x_i) nu_i. Immutable after construction.
class SiteSpace {
public:
  /// Validates: n >= 1, weights strictly positive, positions pairwise
  /// distinct.
  SiteSpace(std::vector<double> positions, std::vector<double> weights);

  int size() const { return static_cast<int>(positions_.size()); }
  const std::vector<double>& positions() const { return positions_; }
  const std::vector<double>& weights() const { return weights_; }
  double position(int i) const { return positions_[static_cast<size_t>(i)]; }
  double weight(int i) const { return weights_[static_cast<size_t>(i)]; }

  /// diag(nu)^{1/2} as a vector.
  Eigen::VectorXd sqrt_weights() const;
  Eigen::VectorXd weight_vector() const;

private:
  std::vector<double> positions_;
  std::vector<double> weights_;
};

/// Equispaced cells on [lo, hi] with midpoint nodes; both rules give
/// nu_i = (hi - lo)/n on an equispaced grid.
SiteSpace make_grid_space(double lo, double hi, int n,
                          WeightRule rule = WeightRule::Uniform);

} // namespace dppdyn

#endif
