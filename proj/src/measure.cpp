#include "dppdyn/measure.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "dppdyn/errors.hpp"
#include "dppdyn/papangelou.hpp"

namespace dppdyn {

namespace {

// det of the principal minor of ell on the bits of mask; det of the empty
// minor is 1.
double principal_minor_det(const Eigen::MatrixXd& ell, std::uint64_t mask, int n) {
  int m = popcount64(mask);
  if (m == 0) return 1.0;
  Eigen::MatrixXd sub(m, m);
  int row = 0;
  for (int i = 0; i < n; ++i) {
    if (!(mask & (1ULL << i))) continue;
    int col = 0;
    for (int j = 0; j < n; ++j) {
      if (!(mask & (1ULL << j))) continue;
      sub(row, col) = ell(i, j);
      ++col;
    }
    ++row;
  }
  return sub.determinant();
}

} // namespace

MeasureTable::MeasureTable(int n, std::vector<double> probabilities)
    : n_(n), prob_(std::move(probabilities)) {
  if (prob_.size() != (1ULL << n))
    throw ValidationError("measure table must have 2^n entries");
  double total = 0.0;
  for (double p : prob_) {
    if (p < 0.0) throw ValidationError("measure table entries must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("measure table entries must sum to 1");
}

double MeasureTable::sum() const {
  double total = 0.0;
  for (double p : prob_) total += p;
  return total;
}

double MeasureTable::sector_mass(int m) const {
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < prob_.size(); ++mask)
    if (popcount64(mask) == m) total += prob_[mask];
  return total;
}

std::vector<double> MeasureTable::sector_conditional(int m) const {
  double mass = sector_mass(m);
  if (mass <= 0.0)
    throw ValidationError("particle-number sector has no probability mass");
  std::vector<double> cond(prob_.size(), 0.0);
  for (std::uint64_t mask = 0; mask < prob_.size(); ++mask)
    if (popcount64(mask) == m) cond[mask] = prob_[mask] / mass;
  return cond;
}

double config_probability(const InteractionOperator& j, const Configuration& gamma) {
  const int n = j.size();
  const Eigen::MatrixXd& ell = j.ensemble_matrix();
  double norm = (Eigen::MatrixXd::Identity(n, n) + ell).determinant();
  return principal_minor_det(ell, gamma.mask(), n) / norm;
}

MeasureTable exact_distribution(const InteractionOperator& j, int enumeration_limit) {
  const int n = j.size();
  if (n > enumeration_limit) throw EnumerationLimitError(n, enumeration_limit);
  const Eigen::MatrixXd& ell = j.ensemble_matrix();
  const std::uint64_t states = 1ULL << n;
  std::vector<double> prob(states);
  double norm = (Eigen::MatrixXd::Identity(n, n) + ell).determinant();
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    double p = principal_minor_det(ell, mask, n) / norm;
    // rank-deficient ensembles can round exact-zero minors slightly negative
    if (p < 0.0 && p > -1e-13) p = 0.0;
    prob[mask] = p;
  }
  return MeasureTable(n, std::move(prob));
}

MeckeResult mecke_check(const InteractionOperator& j, const SiteConfigFunction& f,
                        int enumeration_limit) {
  const int n = j.size();
  MeasureTable mu = exact_distribution(j, enumeration_limit);
  const std::vector<double>& weights = j.space().weights();

  MeckeResult out;
  for (std::uint64_t mask = 0; mask < mu.states(); ++mask) {
    double p = mu.prob(mask);
    if (p == 0.0) continue;
    Configuration gamma = Configuration::from_mask(mask, n);
    double inner_lhs = 0.0;
    for (int x : gamma.sites()) inner_lhs += f(x, gamma);
    out.lhs += p * inner_lhs;

    IntensityProfile prof = intensity_profile(j, gamma);
    double inner_rhs = 0.0;
    for (int x = 0; x < n; ++x) {
      if (gamma.contains(x)) continue;
      double r = prof.value[x];
      if (r == 0.0) continue;
      inner_rhs += weights[static_cast<size_t>(x)] * r * f(x, gamma.with(x));
    }
    out.rhs += p * inner_rhs;
  }
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw ValidationError("total variation requires equal-length distributions");
  double tv = 0.0;
  for (size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

} // namespace dppdyn
