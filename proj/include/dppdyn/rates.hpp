#ifndef DPPDYN_RATES_HPP
#define DPPDYN_RATES_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "dppdyn/configuration.hpp"
#include "dppdyn/kernel.hpp"
#include "dppdyn/papangelou.hpp"

namespace dppdyn {

enum class DynamicsKind { Glauber, Kawasaki };

/// A computed rate above this value aborts the run rather than overflow.
constexpr double kRateOverflowLimit = 1e12;

/// Exponent-family rates:
///   d(x,gamma) = r(x,gamma)^{s-1} 1{r > 0}      (death)
///   b(x,gamma) = r(x,gamma) d(x,gamma) = r^s    (birth)
///   c(x,y,gamma) = a(x,y) r(x,gamma)^{s-1} r(y,gamma)^s 1{both r > 0}
/// with s in [0,1] and a symmetric, nonnegative, bounded mobility with zero
/// diagonal (Kawasaki only).
class RateFamily {
public:
  /// Glauber family.
  RateFamily(DynamicsKind kind, double s);
  /// Kawasaki family. `allow_asymmetric` skips the symmetry rejection; it
  /// exists so the verification suite can inject a broken mobility and watch
  /// the balance check fail.
  RateFamily(DynamicsKind kind, double s, Eigen::MatrixXd mobility,
             bool allow_asymmetric = false);

  DynamicsKind kind() const { return kind_; }
  double exponent() const { return s_; }
  const Eigen::MatrixXd& mobility() const { return mobility_; }
  double mobility(int x, int y) const { return mobility_(x, y); }
  bool has_mobility() const { return mobility_.size() > 0; }

private:
  DynamicsKind kind_;
  double s_;
  Eigen::MatrixXd mobility_;
};

double death_rate(double r_x, double s);
double birth_rate(double r_x, double s);
double hop_rate(double r_x, double r_y, double a_xy, double s);

/// One step of the flux symmetrization
///   c~(x,y) = (c(x,y) + c(y,x) 1{r_x > 0} r_y / r_x) / 2.
/// A balanced pair (r_x c_xy = r_y c_yx) is a fixed point.
double symmetrize(double c_xy, double c_yx, double r_x, double r_y);

/// max over ordered pairs (x,y) of |r_x c(x,y) - r_y c(y,x)| at the given
/// configuration, with intensities taken from the profile (occupied sites
/// contribute r(x, gamma\x)). Kawasaki families only.
double balance_residual(const InteractionOperator& j, const Configuration& gamma,
                        const RateFamily& family);

/// Per-configuration Glauber rates. death[x] = d(x, gamma\x) for occupied x;
/// birth[x] = b(x, gamma) for unoccupied x; zero elsewhere.
struct GlauberRates {
  Eigen::VectorXd death;
  Eigen::VectorXd birth;
};
GlauberRates glauber_rates(const InteractionOperator& j, const RateFamily& family,
                           const Configuration& gamma);

/// Per-configuration exchange rates: entry (x,y) = c(x,y, gamma\x) for
/// occupied x and unoccupied y; zero elsewhere. Bare rates: no quadrature
/// weight and no generator factor 2.
Eigen::MatrixXd kawasaki_rates(const InteractionOperator& j, const RateFamily& family,
                               const Configuration& gamma);

/// Finite-volume values of the first- and second-moment conditions and the
/// sup-diagnostics for the exponent family. The expectation-based entries
/// are exact sums against the enumerated measure; nu-sums run over
/// unoccupied sites, matching the Mecke convention.
struct ConditionReport {
  double sup_mobility_row_sum = 0.0;  // sup_x sum_y a(x,y) nu_y
  double sup_interaction_diag = 0.0;  // sup_x J(x,x)
  std::optional<double> death_l1;     // E | sum_{x in gamma} d(x, gamma\x) |
  std::optional<double> death_l2;
  std::optional<double> birth_l2;     // || sum_{x notin gamma} nu_x b(x,gamma) ||_2
  std::optional<double> hop_l1;       // E[ 2 sum_{x in gamma} sum_y nu_y c(x,y,gamma\x) ]
  std::optional<double> hop_l2;
  std::optional<double> closability_l2; // exponent-family form of the u = -s bound
};

ConditionReport condition_diagnostics(const InteractionOperator& j,
                                      const RateFamily& family,
                                      int enumeration_limit);

} // namespace dppdyn

#endif
