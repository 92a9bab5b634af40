#ifndef DPPDYN_GENERATOR_HPP
#define DPPDYN_GENERATOR_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <optional>
#include <vector>

#include "dppdyn/measure.hpp"
#include "dppdyn/rates.hpp"

namespace dppdyn {

/// Markov generator L = -H on the full configuration space, stored as a
/// sparse matrix over occupancy bitmasks. Off-diagonal entries are jump
/// rates; each diagonal entry balances its row exactly.
///
/// Sign and factor conventions: the stored matrix is the Markov generator
/// (semigroup e^{tQ}); the associated Dirichlet operator is H = -Q. Exchange
/// rates carry the factor 2, so q(gamma, gamma-x+y) = 2 c(x,y,gamma\x) nu_y.
class GeneratorMatrix {
public:
  GeneratorMatrix(DynamicsKind kind, int n,
                  Eigen::SparseMatrix<double, Eigen::RowMajor> q);

  DynamicsKind kind() const { return kind_; }
  int sites() const { return n_; }
  std::uint64_t dim() const { return 1ULL << n_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const { return q_; }
  double rate(std::uint64_t from, std::uint64_t to) const;
  /// max over rows of |row sum| (conservativity residual).
  double conservativity_residual() const;

private:
  DynamicsKind kind_;
  int n_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> q_;
};

/// q(gamma, gamma\x) = d(x, gamma\x); q(gamma, gamma+x) = b(x, gamma) nu_x.
GeneratorMatrix glauber_generator(const InteractionOperator& j,
                                  const RateFamily& family,
                                  int enumeration_limit = kDefaultEnumerationLimit);

/// q(gamma, gamma-x+y) = 2 c(x, y, gamma\x) nu_y; particle number conserved.
GeneratorMatrix kawasaki_generator(const InteractionOperator& j,
                                   const RateFamily& family,
                                   int enumeration_limit = kDefaultEnumerationLimit);

/// max over transitions of |mu(g) q(g,g') - mu(g') q(g',g)|.
double reversibility_check(const GeneratorMatrix& q, const MeasureTable& mu);

/// Exact bilinear forms
///   E_G(F,G) = E_mu sum_{x in gamma} d(x,gamma\x) (D-_x F)(D-_x G)
///   E_K(F,G) = E_mu sum_{x in gamma} sum_{y notin gamma} nu_y c(x,y,gamma\x)
///              (D-+_xy F)(D-+_xy G)
/// The y-sum ranges over unoccupied sites, mirroring the continuum where an
/// occupied target is a nu-null event. Satisfies E(F,G) = <F, -Q G>_mu.
double dirichlet_form(const InteractionOperator& j, const MeasureTable& mu,
                      const RateFamily& family, const std::vector<double>& f,
                      const std::vector<double>& g);

struct SectorSpectrum {
  int particle_number = 0;
  int dim = 0;
  std::vector<double> eigenvalues; // ascending
  std::optional<double> gap;       // smallest nonzero, none if all zero
  int zero_count = 0;
};

struct SpectralReport {
  std::vector<double> eigenvalues; // ascending; Ritz subset when partial
  std::optional<double> gap;
  int zero_count = 0;
  bool partial = false;            // iterative path: extremal values only
  std::vector<SectorSpectrum> sectors; // Kawasaki only
};

/// Spectrum of -Q in the mu-weighted inner product, computed from the
/// symmetric matrix with entries sqrt(q(g,g') q(g',g)) on the support of mu.
/// Dense diagonalization up to dense_limit states per block; a deflated
/// Lanczos iteration for the extremal lower spectrum beyond. Kawasaki
/// spectra are reported per particle-number sector. Throws if Q is not
/// reversible for mu.
SpectralReport spectral_analysis(const GeneratorMatrix& q, const MeasureTable& mu,
                                 std::uint64_t dense_limit = 4096);

} // namespace dppdyn

#endif
