#include "dppdyn/papangelou.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dppdyn/errors.hpp"

namespace dppdyn {

namespace {

double clamp_intensity(double r) { return r < kZeroThreshold ? 0.0 : r; }

} // namespace

CholeskyTracker::CholeskyTracker(const InteractionOperator& j) : j_(&j) {
  const int n = j.size();
  pos_.assign(static_cast<size_t>(n), -1);
  l_ = Eigen::MatrixXd::Zero(n, n);
  reset(Configuration());
}

void CholeskyTracker::reset(const Configuration& gamma) {
  gamma_ = gamma;
  order_ = gamma.sites();
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int p = 0; p < static_cast<int>(order_.size()); ++p)
    pos_[static_cast<size_t>(order_[static_cast<size_t>(p)])] = p;
  active_ = static_cast<int>(order_.size());
  factorize_pivoted();
}

// Cholesky with diagonal pivoting; a pivot below the zero threshold marks
// det J_gamma = 0 and every intensity built from this factor is zero.
void CholeskyTracker::factorize_pivoted() {
  const Eigen::MatrixXd& j = j_->matrix();
  const int m = active_;
  singular_ = false;
  l_.setZero();
  if (m == 0) return;

  Eigen::MatrixXd a(m, m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      a(p, q) = j(order_[static_cast<size_t>(p)], order_[static_cast<size_t>(q)]);

  for (int k = 0; k < m; ++k) {
    int best = k;
    for (int p = k + 1; p < m; ++p)
      if (a(p, p) > a(best, best)) best = p;
    if (best != k) {
      a.row(k).swap(a.row(best));
      a.col(k).swap(a.col(best));
      l_.row(k).swap(l_.row(best));
      std::swap(order_[static_cast<size_t>(k)], order_[static_cast<size_t>(best)]);
      pos_[static_cast<size_t>(order_[static_cast<size_t>(k)])] = k;
      pos_[static_cast<size_t>(order_[static_cast<size_t>(best)])] = best;
    }
    double pivot = a(k, k);
    if (pivot < kZeroThreshold) {
      singular_ = true;
      l_.setZero();
      return;
    }
    double d = std::sqrt(pivot);
    l_(k, k) = d;
    for (int p = k + 1; p < m; ++p) l_(p, k) = a(p, k) / d;
    for (int p = k + 1; p < m; ++p)
      for (int q = k + 1; q <= p; ++q) {
        double v = a(p, q) - l_(p, k) * l_(q, k);
        a(p, q) = v;
        a(q, p) = v;
      }
  }
}

void CholeskyTracker::refactor() {
  ++refactor_count_;
  factorize_pivoted();
}

Eigen::MatrixXd CholeskyTracker::inverse_factor() const {
  const int m = active_;
  return l_.topLeftCorner(m, m)
      .triangularView<Eigen::Lower>()
      .solve(Eigen::MatrixXd::Identity(m, m));
}

void CholeskyTracker::apply_birth(int x) {
  if (pos_[static_cast<size_t>(x)] >= 0)
    throw ValidationError("birth at an occupied site");
  gamma_ = gamma_.with(x);
  if (singular_) {
    order_.push_back(x);
    pos_[static_cast<size_t>(x)] = active_;
    ++active_;
    refactor();
    return;
  }
  const Eigen::MatrixXd& j = j_->matrix();
  const int m = active_;
  Eigen::VectorXd v(m);
  for (int p = 0; p < m; ++p) v[p] = j(order_[static_cast<size_t>(p)], x);
  Eigen::VectorXd w =
      l_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(v);
  double d2 = j(x, x) - w.squaredNorm();
  order_.push_back(x);
  pos_[static_cast<size_t>(x)] = m;
  ++active_;
  if (d2 < kZeroThreshold) {
    // Appending made the factor break down; a pivoted refactorization
    // decides whether the new configuration is genuinely singular.
    refactor();
    return;
  }
  l_.block(m, 0, 1, m) = w.transpose();
  l_(m, m) = std::sqrt(d2);
}

void CholeskyTracker::apply_death(int x) {
  int p = pos_[static_cast<size_t>(x)];
  if (p < 0) throw ValidationError("death at an unoccupied site");
  gamma_ = gamma_.without(x);
  const int m = active_;

  if (singular_) {
    order_.erase(order_.begin() + p);
    for (int q = p; q < m - 1; ++q) pos_[static_cast<size_t>(order_[static_cast<size_t>(q)])] = q;
    pos_[static_cast<size_t>(x)] = -1;
    --active_;
    refactor();
    return;
  }

  const int t = m - p - 1; // trailing block size
  Eigen::VectorXd c = l_.block(p + 1, p, t, 1);
  Eigen::MatrixXd trail = l_.block(p + 1, p + 1, t, t);

  // Rank-one update: find M with M M^T = trail trail^T + c c^T.
  for (int k = 0; k < t; ++k) {
    double r = std::hypot(trail(k, k), c[k]);
    double co = trail(k, k) / r;
    double si = c[k] / r;
    trail(k, k) = r;
    for (int i = k + 1; i < t; ++i) {
      double tmp = trail(i, k);
      trail(i, k) = co * tmp + si * c[i];
      c[i] = co * c[i] - si * tmp;
    }
  }

  // Shift rows below p up, drop column p, splice the updated trailing block.
  for (int i = p + 1; i < m; ++i)
    for (int q = 0; q < p; ++q) l_(i - 1, q) = l_(i, q);
  if (t > 0) l_.block(p, p, t, t) = trail;
  l_.row(m - 1).setZero();
  l_.col(m - 1).setZero();

  order_.erase(order_.begin() + p);
  for (int q = p; q < m - 1; ++q) pos_[static_cast<size_t>(order_[static_cast<size_t>(q)])] = q;
  pos_[static_cast<size_t>(x)] = -1;
  --active_;
}

void CholeskyTracker::apply_hop(int x, int y) {
  apply_death(x);
  apply_birth(y);
}

double CholeskyTracker::factor_residual() const {
  const int m = active_;
  if (m == 0 || singular_) return 0.0;
  const Eigen::MatrixXd& j = j_->matrix();
  Eigen::MatrixXd rec = l_.topLeftCorner(m, m) * l_.topLeftCorner(m, m).transpose();
  double res = 0.0;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      res = std::max(res, std::abs(rec(p, q) - j(order_[static_cast<size_t>(p)],
                                                  order_[static_cast<size_t>(q)])));
  return res;
}

IntensityProfile CholeskyTracker::profile() const {
  const int n = j_->size();
  IntensityProfile out;
  out.value = Eigen::VectorXd::Zero(n);
  out.singular = singular_;
  if (singular_) return out;

  const Eigen::MatrixXd& j = j_->matrix();
  const int m = active_;

  if (m == 0) {
    for (int x = 0; x < n; ++x) out.value[x] = clamp_intensity(j(x, x));
    return out;
  }

  Eigen::MatrixXd linv = inverse_factor();
  // Occupied x at position p: r(x, gamma\x) = 1 / (J_gamma^{-1})_pp.
  for (int p = 0; p < m; ++p) {
    double ipp = linv.col(p).squaredNorm();
    out.value[order_[static_cast<size_t>(p)]] = clamp_intensity(1.0 / ipp);
  }
  // Unoccupied y: Schur complement against the whole of gamma.
  for (int y = 0; y < n; ++y) {
    if (pos_[static_cast<size_t>(y)] >= 0) continue;
    Eigen::VectorXd v(m);
    for (int p = 0; p < m; ++p) v[p] = j(order_[static_cast<size_t>(p)], y);
    Eigen::VectorXd w = linv * v;
    out.value[y] = clamp_intensity(j(y, y) - w.squaredNorm());
  }
  return out;
}

PairIntensityContext CholeskyTracker::pair_context() const {
  const int n = j_->size();
  PairIntensityContext out;
  out.occupied = Eigen::VectorXd::Zero(n);
  out.free_given_gamma = Eigen::VectorXd::Zero(n);
  out.free_given_removed = Eigen::MatrixXd::Zero(n, n);
  out.singular = singular_;
  if (singular_) return out;

  const Eigen::MatrixXd& j = j_->matrix();
  const int m = active_;

  if (m == 0) {
    for (int y = 0; y < n; ++y) out.free_given_gamma[y] = clamp_intensity(j(y, y));
    return out;
  }

  Eigen::MatrixXd linv = inverse_factor();
  Eigen::VectorXd inv_diag(m);
  for (int p = 0; p < m; ++p) inv_diag[p] = linv.col(p).squaredNorm();
  for (int p = 0; p < m; ++p)
    out.occupied[order_[static_cast<size_t>(p)]] = clamp_intensity(1.0 / inv_diag[p]);

  for (int y = 0; y < n; ++y) {
    if (pos_[static_cast<size_t>(y)] >= 0) continue;
    Eigen::VectorXd v(m);
    for (int p = 0; p < m; ++p) v[p] = j(order_[static_cast<size_t>(p)], y);
    Eigen::VectorXd w = linv * v;
    double r_full = j(y, y) - w.squaredNorm();
    out.free_given_gamma[y] = clamp_intensity(r_full);
    // q = J_gamma^{-1} v; removing occupied x at position p raises the
    // intensity by q_p^2 / (J_gamma^{-1})_pp.
    Eigen::VectorXd q = linv.transpose() * w;
    for (int p = 0; p < m; ++p) {
      double r_rm = r_full + q[p] * q[p] / inv_diag[p];
      out.free_given_removed(y, order_[static_cast<size_t>(p)]) = clamp_intensity(r_rm);
    }
  }
  return out;
}

double intensity(const InteractionOperator& j, const Configuration& gamma, int x) {
  if (x < 0 || x >= j.size()) throw ValidationError("site index out of range");
  if (gamma.contains(x))
    throw ValidationError("intensity requires x outside the configuration");
  CholeskyTracker tracker(j);
  tracker.reset(gamma);
  return tracker.profile().value[x];
}

IntensityProfile intensity_profile(const InteractionOperator& j,
                                   const Configuration& gamma) {
  CholeskyTracker tracker(j);
  tracker.reset(gamma);
  return tracker.profile();
}

PairIntensityContext pair_intensity_context(const InteractionOperator& j,
                                            const Configuration& gamma) {
  CholeskyTracker tracker(j);
  tracker.reset(gamma);
  return tracker.pair_context();
}

double bound_check(const InteractionOperator& j, const Configuration& gamma) {
  IntensityProfile prof = intensity_profile(j, gamma);
  double worst = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < j.size(); ++x) {
    if (gamma.contains(x)) continue;
    worst = std::max(worst, prof.value[x] - j.diagonal(x));
  }
  return std::isfinite(worst) ? worst : 0.0;
}

} // namespace dppdyn
