#include "dppdyn/generator.hpp"

#include <algorithm>
#include <cmath>

#include "dppdyn/errors.hpp"
#include "dppdyn/rng.hpp"

namespace dppdyn {

namespace {

constexpr double kReversibilityGate = 1e-8;
constexpr double kSupportFloor = 1e-15;

double spectral_zero_tol(double lambda_max) {
  return 1e-9 * std::max(1.0, lambda_max);
}

void finish_sector(SectorSpectrum& sector) {
  std::sort(sector.eigenvalues.begin(), sector.eigenvalues.end());
  double lam_max = sector.eigenvalues.empty() ? 0.0 : sector.eigenvalues.back();
  double tol = spectral_zero_tol(lam_max);
  for (double lam : sector.eigenvalues) {
    if (lam <= tol) {
      ++sector.zero_count;
    } else {
      sector.gap = lam;
      break;
    }
  }
}

} // namespace

GeneratorMatrix::GeneratorMatrix(DynamicsKind kind, int n,
                                 Eigen::SparseMatrix<double, Eigen::RowMajor> q)
    : kind_(kind), n_(n), q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() != static_cast<Eigen::Index>(dim()))
    throw ValidationError("generator matrix must be 2^n x 2^n");
}

double GeneratorMatrix::rate(std::uint64_t from, std::uint64_t to) const {
  return q_.coeff(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
}

double GeneratorMatrix::conservativity_residual() const {
  double worst = 0.0;
  for (Eigen::Index row = 0; row < q_.rows(); ++row) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(q_, row);
         it; ++it)
      sum += it.value();
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

GeneratorMatrix glauber_generator(const InteractionOperator& j,
                                  const RateFamily& family,
                                  int enumeration_limit) {
  const int n = j.size();
  if (n > enumeration_limit) throw EnumerationLimitError(n, enumeration_limit);
  const std::vector<double>& nu = j.space().weights();
  const std::uint64_t dim = 1ULL << n;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(dim * static_cast<std::uint64_t>(n + 1));
  for (std::uint64_t mask = 0; mask < dim; ++mask) {
    Configuration gamma = Configuration::from_mask(mask, n);
    GlauberRates rates = glauber_rates(j, family, gamma);
    double total = 0.0;
    for (int x = 0; x < n; ++x) {
      std::uint64_t bit = 1ULL << x;
      double rate = (mask & bit) ? rates.death[x] : rates.birth[x] * nu[static_cast<size_t>(x)];
      if (rate > 0.0) {
        trip.emplace_back(static_cast<Eigen::Index>(mask),
                          static_cast<Eigen::Index>(mask ^ bit), rate);
        total += rate;
      }
    }
    if (total > 0.0)
      trip.emplace_back(static_cast<Eigen::Index>(mask),
                        static_cast<Eigen::Index>(mask), -total);
  }

  Eigen::SparseMatrix<double, Eigen::RowMajor> q(static_cast<Eigen::Index>(dim),
                                                 static_cast<Eigen::Index>(dim));
  q.setFromTriplets(trip.begin(), trip.end());
  return GeneratorMatrix(DynamicsKind::Glauber, n, std::move(q));
}

GeneratorMatrix kawasaki_generator(const InteractionOperator& j,
                                   const RateFamily& family,
                                   int enumeration_limit) {
  if (family.kind() != DynamicsKind::Kawasaki)
    throw ValidationError("kawasaki generator requires a Kawasaki rate family");
  const int n = j.size();
  if (n > enumeration_limit) throw EnumerationLimitError(n, enumeration_limit);
  const std::vector<double>& nu = j.space().weights();
  const std::uint64_t dim = 1ULL << n;

  std::vector<Eigen::Triplet<double>> trip;
  for (std::uint64_t mask = 0; mask < dim; ++mask) {
    Configuration gamma = Configuration::from_mask(mask, n);
    Eigen::MatrixXd c = kawasaki_rates(j, family, gamma);
    double total = 0.0;
    for (int x : gamma.sites()) {
      for (int y = 0; y < n; ++y) {
        if (mask & (1ULL << y)) continue;
        double rate = 2.0 * c(x, y) * nu[static_cast<size_t>(y)];
        if (rate > 0.0) {
          std::uint64_t to = (mask ^ (1ULL << x)) | (1ULL << y);
          trip.emplace_back(static_cast<Eigen::Index>(mask),
                            static_cast<Eigen::Index>(to), rate);
          total += rate;
        }
      }
    }
    if (total > 0.0)
      trip.emplace_back(static_cast<Eigen::Index>(mask),
                        static_cast<Eigen::Index>(mask), -total);
  }

  Eigen::SparseMatrix<double, Eigen::RowMajor> q(static_cast<Eigen::Index>(dim),
                                                 static_cast<Eigen::Index>(dim));
  q.setFromTriplets(trip.begin(), trip.end());
  return GeneratorMatrix(DynamicsKind::Kawasaki, n, std::move(q));
}

double reversibility_check(const GeneratorMatrix& q, const MeasureTable& mu) {
  if (q.dim() != mu.states())
    throw ValidationError("generator and measure dimensions differ");
  const auto& mat = q.matrix();
  double worst = 0.0;
  for (Eigen::Index row = 0; row < mat.rows(); ++row) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, row);
         it; ++it) {
      if (it.col() == row) continue;
      double forward = mu.prob(static_cast<std::uint64_t>(row)) * it.value();
      double backward = mu.prob(static_cast<std::uint64_t>(it.col())) *
                        mat.coeff(it.col(), row);
      worst = std::max(worst, std::abs(forward - backward));
    }
  }
  return worst;
}

double dirichlet_form(const InteractionOperator& j, const MeasureTable& mu,
                      const RateFamily& family, const std::vector<double>& f,
                      const std::vector<double>& g) {
  const int n = j.size();
  if (mu.states() != (1ULL << n) || f.size() != mu.states() || g.size() != mu.states())
    throw ValidationError("dirichlet form tables must cover all 2^n configurations");
  const std::vector<double>& nu = j.space().weights();

  double total = 0.0;
  for (std::uint64_t mask = 0; mask < mu.states(); ++mask) {
    double p = mu.prob(mask);
    if (p == 0.0) continue;
    Configuration gamma = Configuration::from_mask(mask, n);

    if (family.kind() == DynamicsKind::Glauber) {
      GlauberRates rates = glauber_rates(j, family, gamma);
      double acc = 0.0;
      for (int x : gamma.sites()) {
        std::uint64_t down = mask ^ (1ULL << x);
        acc += rates.death[x] * (f[down] - f[mask]) * (g[down] - g[mask]);
      }
      total += p * acc;
    } else {
      Eigen::MatrixXd c = kawasaki_rates(j, family, gamma);
      double acc = 0.0;
      for (int x : gamma.sites()) {
        for (int y = 0; y < n; ++y) {
          if (mask & (1ULL << y)) continue;
          if (c(x, y) == 0.0) continue;
          std::uint64_t hop = (mask ^ (1ULL << x)) | (1ULL << y);
          acc += nu[static_cast<size_t>(y)] * c(x, y) * (f[hop] - f[mask]) *
                 (g[hop] - g[mask]);
        }
      }
      total += p * acc;
    }
  }
  return total;
}

namespace {

// Dense spectrum of the mu-symmetrized -Q restricted to `states`.
std::vector<double> dense_block_spectrum(
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& q,
    const std::vector<std::uint64_t>& states) {
  const int dim = static_cast<int>(states.size());
  std::vector<Eigen::Index> position(q.rows(), -1);
  for (int i = 0; i < dim; ++i) position[static_cast<Eigen::Index>(states[static_cast<size_t>(i)])] = i;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    Eigen::Index row = static_cast<Eigen::Index>(states[static_cast<size_t>(i)]);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(q, row);
         it; ++it) {
      if (it.col() == row) {
        a(i, i) = -it.value();
      } else if (position[it.col()] >= 0) {
        // Geometric-mean symmetrization; equals the mu-similarity under
        // detailed balance and avoids ratios of tiny probabilities.
        double back = q.coeff(it.col(), row);
        a(i, position[it.col()]) = -std::sqrt(std::max(it.value() * back, 0.0));
      }
    }
  }
  a = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + dim);
  return lam;
}

// Deflated Lanczos with full reorthogonalization: extremal low eigenvalues
// of the symmetrized -Q on the orthogonal complement of the known invariant
// vector sqrt(mu).
std::vector<double> lanczos_low_spectrum(
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& q,
    const std::vector<std::uint64_t>& states, const MeasureTable& mu,
    int num_values) {
  const Eigen::Index full = q.rows();
  const int dim = static_cast<int>(states.size());
  std::vector<Eigen::Index> position(full, -1);
  for (int i = 0; i < dim; ++i) position[static_cast<Eigen::Index>(states[static_cast<size_t>(i)])] = i;

  // Assemble the symmetrized block sparsely.
  std::vector<Eigen::Triplet<double>> trip;
  double gersh = 0.0;
  for (int i = 0; i < dim; ++i) {
    Eigen::Index row = static_cast<Eigen::Index>(states[static_cast<size_t>(i)]);
    double diag = 0.0, offsum = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(q, row);
         it; ++it) {
      if (it.col() == row) {
        diag = -it.value();
      } else if (position[it.col()] >= 0) {
        double v = -std::sqrt(std::max(it.value() * q.coeff(it.col(), row), 0.0));
        if (v != 0.0) {
          trip.emplace_back(i, position[it.col()], v);
          offsum += std::abs(v);
        }
      }
    }
    trip.emplace_back(i, i, diag);
    gersh = std::max(gersh, diag + offsum);
  }
  Eigen::SparseMatrix<double> a(dim, dim);
  a.setFromTriplets(trip.begin(), trip.end());
  a = 0.5 * (Eigen::SparseMatrix<double>(a.transpose()) + a);

  Eigen::VectorXd v0(dim);
  for (int i = 0; i < dim; ++i)
    v0[i] = std::sqrt(mu.prob(states[static_cast<size_t>(i)]));
  v0.normalize();

  // Krylov iteration with B = sigma I - A so that the low end of A is the
  // amplified end; the invariant sqrt(mu) direction is deflated each step.
  // Ritz values come from an explicit projection of A onto the basis: with
  // full reorthogonalization the three-term recurrence coefficients no
  // longer represent the projected operator faithfully.
  const double sigma = gersh + 1.0;
  const int steps = std::min(dim - 1, 240);
  Eigen::MatrixXd basis(dim, steps);

  SeededStream rng(20240811ULL);
  Eigen::VectorXd w(dim);
  for (int i = 0; i < dim; ++i) w[i] = rng.next_symmetric();
  w -= v0.dot(w) * v0;
  w.normalize();

  int built = 0;
  for (int k = 0; k < steps; ++k) {
    basis.col(k) = w;
    ++built;
    Eigen::VectorXd z = sigma * w - a * w;
    z -= v0.dot(z) * v0;
    for (int p = 0; p <= k; ++p) z -= basis.col(p).dot(z) * basis.col(p);
    for (int p = 0; p <= k; ++p) z -= basis.col(p).dot(z) * basis.col(p);
    double nz = z.norm();
    if (nz < 1e-10) break;
    w = z / nz;
  }

  Eigen::MatrixXd v = basis.leftCols(built);
  Eigen::MatrixXd av(dim, built);
  for (int k = 0; k < built; ++k) av.col(k) = a * v.col(k);
  Eigen::MatrixXd h = v.transpose() * av;
  h = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  std::vector<double> low;
  for (int k = 0; k < built && static_cast<int>(low.size()) < num_values; ++k)
    low.push_back(es.eigenvalues()[k]);
  return low;
}

} // namespace

SpectralReport spectral_analysis(const GeneratorMatrix& q, const MeasureTable& mu,
                                 std::uint64_t dense_limit) {
  if (q.dim() != mu.states())
    throw ValidationError("generator and measure dimensions differ");
  double rev = reversibility_check(q, mu);
  if (rev > kReversibilityGate)
    throw ValidationError("generator is not reversible for the target measure; residual " +
                          std::to_string(rev));

  std::vector<std::uint64_t> support;
  for (std::uint64_t mask = 0; mask < mu.states(); ++mask)
    if (mu.prob(mask) > kSupportFloor) support.push_back(mask);

  SpectralReport report;

  if (q.kind() == DynamicsKind::Kawasaki) {
    int n = q.sites();
    for (int m = 0; m <= n; ++m) {
      std::vector<std::uint64_t> sector_states;
      for (std::uint64_t mask : support)
        if (popcount64(mask) == m) sector_states.push_back(mask);
      if (sector_states.empty()) continue;
      SectorSpectrum sector;
      sector.particle_number = m;
      sector.dim = static_cast<int>(sector_states.size());
      sector.eigenvalues = dense_block_spectrum(q.matrix(), sector_states);
      finish_sector(sector);
      report.sectors.push_back(sector);
      report.eigenvalues.insert(report.eigenvalues.end(),
                                sector.eigenvalues.begin(),
                                sector.eigenvalues.end());
      report.zero_count += sector.zero_count;
    }
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end());
    for (const SectorSpectrum& sector : report.sectors)
      if (sector.gap && (!report.gap || *sector.gap < *report.gap))
        report.gap = sector.gap;
    return report;
  }

  if (support.size() <= dense_limit) {
    report.eigenvalues = dense_block_spectrum(q.matrix(), support);
    double lam_max = report.eigenvalues.empty() ? 0.0 : report.eigenvalues.back();
    double tol = spectral_zero_tol(lam_max);
    for (double lam : report.eigenvalues) {
      if (lam <= tol) {
        ++report.zero_count;
      } else {
        report.gap = lam;
        break;
      }
    }
  } else {
    report.partial = true;
    report.eigenvalues = lanczos_low_spectrum(q.matrix(), support, mu, 8);
    // The deflated sqrt(mu) direction usually re-enters as a ~0 Ritz value;
    // count it once, not twice.
    int subthreshold = 0;
    for (double lam : report.eigenvalues) {
      if (lam > spectral_zero_tol(1.0)) {
        report.gap = lam;
        break;
      }
      ++subthreshold;
    }
    report.zero_count = 1 + std::max(0, subthreshold - 1);
  }
  return report;
}

} // namespace dppdyn
