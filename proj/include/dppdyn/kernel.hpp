#ifndef DPPDYN_KERNEL_HPP
#define DPPDYN_KERNEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dppdyn/site_space.hpp"

namespace dppdyn {

// Kernel builders. Hermiticity and the spectral constraint are stated for
// the weight-symmetrized matrix S = D^{1/2} K D^{1/2}, D = diag(nu): that is
// the matrix unitarily equivalent to the operator on the weighted space.

struct DiagonalSpec {
  std::vector<double> values; // kernel diagonal K(x_i, x_i); size 1 broadcasts
};

struct MatrixSpec {
  Eigen::MatrixXd values; // explicit kernel values K(x_i, x_j)
};

/// alpha * sin(pi (x-y) rho) / (pi (x-y)), value alpha*rho on the diagonal.
/// Rescaled multiplicatively if the top eigenvalue of S exceeds 1 - eps.
struct ShrunkSineSpec {
  double alpha = 0.9;
  double density = 1.0;
};

/// scale * exp(-(x-y)^2 / (2 lengthscale^2)), rescaled like ShrunkSineSpec.
struct RbfContractionSpec {
  double lengthscale = 1.0;
  double scale = 0.5;
};

/// Random PSD matrix in the symmetrized domain: a Wishart draw with its
/// spectrum floored at 1% of the top eigenvalue, rescaled so the top
/// eigenvalue of S equals lambda_max exactly.
struct RandomContractionSpec {
  std::uint64_t seed = 1;
  double lambda_max = 0.9;
};

using KernelSpec = std::variant<DiagonalSpec, MatrixSpec, ShrunkSineSpec,
                                RbfContractionSpec, RandomContractionSpec>;

constexpr double kDefaultSpectralMargin = 1e-3;

/// Correlation kernel K on a weighted site space. Spectrum of the
/// symmetrized matrix confined to [0, 1 - eps]. Immutable; the
/// eigendecomposition of S is computed once and shared.
class KernelOperator {
public:
  static KernelOperator build(const SiteSpace& space, const KernelSpec& spec,
                              double eps = kDefaultSpectralMargin);

  /// Bypasses the spectral checks; intended for diagnostics and tests.
  static KernelOperator unchecked(SiteSpace space, Eigen::MatrixXd kernel,
                                  double eps = kDefaultSpectralMargin);

  const SiteSpace& space() const { return space_; }
  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const Eigen::MatrixXd& symmetrized() const { return sym_; }
  /// Eigenvalues of S, ascending.
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const Eigen::MatrixXd& eigenvectors() const { return evecs_; }
  double epsilon() const { return eps_; }
  int size() const { return space_.size(); }
  double weighted_trace() const;

private:
  KernelOperator(SiteSpace space, Eigen::MatrixXd kernel, double eps);

  SiteSpace space_;
  Eigen::MatrixXd kernel_;
  Eigen::MatrixXd sym_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
  double eps_;
};

struct KernelDiagnostics {
  double hermiticity_residual = 0.0; // max |S - S^T|
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double trace = 0.0;  // sum_i K(x_i,x_i) nu_i
  double margin = 0.0; // 1 - lambda_max
  std::vector<std::string> violations;
  bool ok = true;
};

/// Reports spectral/Hermiticity diagnostics; violations are listed, never
/// thrown.
KernelDiagnostics validate_kernel(const KernelOperator& kernel);

/// Interaction operator J = K (1 - K)^{-1} on the same weighted space.
/// The L-ensemble matrix D^{1/2} J D^{1/2} is cached alongside.
class InteractionOperator {
public:
  static InteractionOperator from_kernel(const KernelOperator& kernel);

  /// Direct construction from J values (tests, hand-built examples).
  InteractionOperator(SiteSpace space, Eigen::MatrixXd j_values);

  const SiteSpace& space() const { return space_; }
  const Eigen::MatrixXd& matrix() const { return j_; }
  /// L = D^{1/2} J D^{1/2}: principal minors of L give unnormalized
  /// configuration weights.
  const Eigen::MatrixXd& ensemble_matrix() const { return ell_; }
  int size() const { return space_.size(); }
  double diagonal(int i) const { return j_(i, i); }

  /// K recovered through the inverse spectral map J -> J (1 + J)^{-1}.
  Eigen::MatrixXd recover_kernel() const;

private:
  SiteSpace space_;
  Eigen::MatrixXd j_;
  Eigen::MatrixXd ell_;
};

/// J from K by mapping eigenvalues lambda -> lambda / (1 - lambda) of the
/// symmetrized matrix and undoing the weight similarity. Throws
/// NumericalAbort when the spectral margin is below 1e-12.
InteractionOperator interaction_operator(const KernelOperator& kernel);

} // namespace dppdyn

#endif
