#include "dppdyn/rates.hpp"

#include <cmath>

#include "dppdyn/errors.hpp"
#include "dppdyn/measure.hpp"

namespace dppdyn {

namespace {

double checked(double rate) {
  if (!(rate <= kRateOverflowLimit))
    throw NumericalAbort("near-singular intensity: rate " + std::to_string(rate) +
                         " exceeds overflow limit");
  return rate;
}

} // namespace

RateFamily::RateFamily(DynamicsKind kind, double s) : kind_(kind), s_(s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw ValidationError("rate exponent s must lie in [0,1]");
  if (kind == DynamicsKind::Kawasaki)
    throw ValidationError("Kawasaki family requires a mobility table");
}

RateFamily::RateFamily(DynamicsKind kind, double s, Eigen::MatrixXd mobility,
                       bool allow_asymmetric)
    : kind_(kind), s_(s), mobility_(std::move(mobility)) {
  if (!(s >= 0.0 && s <= 1.0))
    throw ValidationError("rate exponent s must lie in [0,1]");
  if (kind != DynamicsKind::Kawasaki)
    throw ValidationError("mobility table is only meaningful for Kawasaki dynamics");
  if (mobility_.rows() != mobility_.cols())
    throw ValidationError("mobility table must be square");
  for (int i = 0; i < mobility_.rows(); ++i) {
    mobility_(i, i) = 0.0;
    for (int k = 0; k < mobility_.cols(); ++k) {
      double a = mobility_(i, k);
      if (!(a >= 0.0) || !std::isfinite(a))
        throw ValidationError("mobility entries must be nonnegative and finite");
      if (!allow_asymmetric && std::abs(a - mobility_(k, i)) > 0.0)
        throw ValidationError("mobility table must be symmetric");
    }
  }
}

double death_rate(double r_x, double s) {
  if (r_x <= kZeroThreshold) return 0.0;
  return checked(std::pow(r_x, s - 1.0));
}

double birth_rate(double r_x, double s) {
  if (r_x <= kZeroThreshold) return 0.0;
  // b = r * d holds bit-exactly by construction.
  return checked(r_x * death_rate(r_x, s));
}

double hop_rate(double r_x, double r_y, double a_xy, double s) {
  if (r_x <= kZeroThreshold || r_y <= kZeroThreshold || a_xy == 0.0) return 0.0;
  return checked(a_xy * std::pow(r_x, s - 1.0) * std::pow(r_y, s));
}

double symmetrize(double c_xy, double c_yx, double r_x, double r_y) {
  if (r_x <= kZeroThreshold) return 0.5 * c_xy;
  return 0.5 * (c_xy + c_yx * (r_y / r_x));
}

double balance_residual(const InteractionOperator& j, const Configuration& gamma,
                        const RateFamily& family) {
  if (family.kind() != DynamicsKind::Kawasaki)
    throw ValidationError("balance residual is defined for Kawasaki families");
  const int n = j.size();
  IntensityProfile prof = intensity_profile(j, gamma);
  const double s = family.exponent();
  double worst = 0.0;
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      double rx = prof.value[x];
      double ry = prof.value[y];
      double forward = rx * hop_rate(rx, ry, family.mobility(x, y), s);
      double backward = ry * hop_rate(ry, rx, family.mobility(y, x), s);
      worst = std::max(worst, std::abs(forward - backward));
    }
  }
  return worst;
}

GlauberRates glauber_rates(const InteractionOperator& j, const RateFamily& family,
                           const Configuration& gamma) {
  const int n = j.size();
  const double s = family.exponent();
  IntensityProfile prof = intensity_profile(j, gamma);
  GlauberRates out;
  out.death = Eigen::VectorXd::Zero(n);
  out.birth = Eigen::VectorXd::Zero(n);
  for (int x = 0; x < n; ++x) {
    if (gamma.contains(x))
      out.death[x] = death_rate(prof.value[x], s);
    else
      out.birth[x] = birth_rate(prof.value[x], s);
  }
  return out;
}

Eigen::MatrixXd kawasaki_rates(const InteractionOperator& j, const RateFamily& family,
                               const Configuration& gamma) {
  const int n = j.size();
  const double s = family.exponent();
  PairIntensityContext ctx = pair_intensity_context(j, gamma);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int x : gamma.sites()) {
    double r_x = ctx.occupied[x];
    if (r_x == 0.0) continue;
    for (int y = 0; y < n; ++y) {
      if (gamma.contains(y)) continue;
      c(x, y) = hop_rate(r_x, ctx.free_given_removed(y, x), family.mobility(x, y), s);
    }
  }
  return c;
}

ConditionReport condition_diagnostics(const InteractionOperator& j,
                                      const RateFamily& family,
                                      int enumeration_limit) {
  const int n = j.size();
  const std::vector<double>& nu = j.space().weights();
  ConditionReport out;

  for (int x = 0; x < n; ++x)
    out.sup_interaction_diag = std::max(out.sup_interaction_diag, j.diagonal(x));
  if (family.has_mobility()) {
    for (int x = 0; x < n; ++x) {
      double row = 0.0;
      for (int y = 0; y < n; ++y) row += family.mobility(x, y) * nu[static_cast<size_t>(y)];
      out.sup_mobility_row_sum = std::max(out.sup_mobility_row_sum, row);
    }
  }

  if (n > enumeration_limit) return out;
  MeasureTable mu = exact_distribution(j, enumeration_limit);
  const double s = family.exponent();

  double death_m1 = 0.0, death_m2 = 0.0;
  double birth_m2 = 0.0;
  double hop_m1 = 0.0, hop_m2 = 0.0;
  double clos_m2 = 0.0;

  for (std::uint64_t mask = 0; mask < mu.states(); ++mask) {
    double p = mu.prob(mask);
    if (p == 0.0) continue;
    Configuration gamma = Configuration::from_mask(mask, n);

    if (family.kind() == DynamicsKind::Glauber) {
      GlauberRates rates = glauber_rates(j, family, gamma);
      double death_sum = rates.death.sum();
      double birth_sum = 0.0;
      for (int x = 0; x < n; ++x) birth_sum += nu[static_cast<size_t>(x)] * rates.birth[x];
      death_m1 += p * death_sum;
      death_m2 += p * death_sum * death_sum;
      birth_m2 += p * birth_sum * birth_sum;
    } else {
      Eigen::MatrixXd c = kawasaki_rates(j, family, gamma);
      double hop_sum = 0.0;
      for (int x : gamma.sites())
        for (int y = 0; y < n; ++y) hop_sum += nu[static_cast<size_t>(y)] * c(x, y);
      hop_m1 += p * 2.0 * hop_sum;
      hop_m2 += p * 4.0 * hop_sum * hop_sum;

      // Closability bound for the exponent family with u = -s: the integrand
      // reduces to sum_{y in gamma} sum_x nu_x a(x,y) r(x, gamma\y)^s.
      PairIntensityContext ctx = pair_intensity_context(j, gamma);
      double g = 0.0;
      for (int y : gamma.sites()) {
        if (ctx.occupied[y] == 0.0) continue;
        for (int x = 0; x < n; ++x) {
          if (gamma.contains(x)) continue;
          double r_xy = ctx.free_given_removed(x, y);
          if (r_xy == 0.0) continue;
          g += nu[static_cast<size_t>(x)] * family.mobility(x, y) * std::pow(r_xy, s);
        }
      }
      clos_m2 += p * g * g;
    }
  }

  if (family.kind() == DynamicsKind::Glauber) {
    out.death_l1 = death_m1;
    out.death_l2 = std::sqrt(death_m2);
    out.birth_l2 = std::sqrt(birth_m2);
  } else {
    out.hop_l1 = hop_m1;
    out.hop_l2 = std::sqrt(hop_m2);
    out.closability_l2 = std::sqrt(clos_m2);
  }
  return out;
}

} // namespace dppdyn
