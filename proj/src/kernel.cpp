#include "dppdyn/kernel.hpp"

#include <cmath>

#include "dppdyn/errors.hpp"
#include "dppdyn/rng.hpp"

namespace dppdyn {

namespace {

constexpr double kHermiticityTol = 1e-12;
constexpr double kNegativeEigTol = 1e-10;

Eigen::MatrixXd symmetrize_weighted(const Eigen::MatrixXd& kernel,
                                    const SiteSpace& space) {
  Eigen::VectorXd d = space.sqrt_weights();
  return d.asDiagonal() * kernel * d.asDiagonal();
}

Eigen::MatrixXd unsymmetrize_weighted(const Eigen::MatrixXd& sym,
                                      const SiteSpace& space) {
  Eigen::VectorXd dinv = space.sqrt_weights().cwiseInverse();
  return dinv.asDiagonal() * sym * dinv.asDiagonal();
}

Eigen::MatrixXd sine_kernel(const SiteSpace& space, double alpha, double rho) {
  const int n = space.size();
  Eigen::MatrixXd k(n, n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double dx = space.position(i) - space.position(j);
      k(i, j) = (i == j) ? alpha * rho : alpha * std::sin(pi * dx * rho) / (pi * dx);
    }
  }
  return k;
}

Eigen::MatrixXd rbf_kernel(const SiteSpace& space, double ell, double scale) {
  const int n = space.size();
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double dx = space.position(i) - space.position(j);
      k(i, j) = scale * std::exp(-dx * dx / (2.0 * ell * ell));
    }
  }
  return k;
}

// Wishart draw G G^T / n with the spectrum floored at 1% of its top value,
// then rescaled so the top eigenvalue is exactly lambda_max. The floor keeps
// every built kernel away from rank deficiency (condition number of the
// symmetrized matrix at most 100).
Eigen::MatrixXd random_psd_symmetrized(int n, std::uint64_t seed,
                                       double lambda_max) {
  SeededStream rng(seed);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.next_normal();
  Eigen::MatrixXd wishart = g * g.transpose() / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(wishart);
  Eigen::VectorXd lam = es.eigenvalues();
  double floor_value = 0.01 * lam.maxCoeff();
  for (int i = 0; i < n; ++i) lam[i] = std::max(lam[i], floor_value);
  lam *= lambda_max / lam.maxCoeff();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace

KernelOperator::KernelOperator(SiteSpace space, Eigen::MatrixXd kernel,
                               double eps)
    : space_(std::move(space)), kernel_(std::move(kernel)), eps_(eps) {
  sym_ = symmetrize_weighted(kernel_, space_);
  Eigen::MatrixXd half = 0.5 * (sym_ + sym_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(half);
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
}

KernelOperator KernelOperator::unchecked(SiteSpace space,
                                         Eigen::MatrixXd kernel, double eps) {
  if (kernel.rows() != space.size() || kernel.cols() != space.size())
    throw ValidationError("kernel matrix shape does not match site space");
  return KernelOperator(std::move(space), std::move(kernel), eps);
}

double KernelOperator::weighted_trace() const {
  double t = 0.0;
  for (int i = 0; i < size(); ++i) t += kernel_(i, i) * space_.weight(i);
  return t;
}

KernelOperator KernelOperator::build(const SiteSpace& space,
                                     const KernelSpec& spec, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ValidationError("spectral margin epsilon must lie in (0,1)");
  const int n = space.size();

  Eigen::MatrixXd kernel;
  bool rescalable = false;

  if (const auto* d = std::get_if<DiagonalSpec>(&spec)) {
    std::vector<double> vals = d->values;
    if (vals.size() == 1) vals.assign(static_cast<size_t>(n), vals[0]);
    if (static_cast<int>(vals.size()) != n)
      throw ValidationError("diagonal kernel needs one value per site");
    kernel = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (vals[static_cast<size_t>(i)] < 0.0)
        throw ValidationError("diagonal kernel values must be nonnegative");
      kernel(i, i) = vals[static_cast<size_t>(i)];
    }
  } else if (const auto* m = std::get_if<MatrixSpec>(&spec)) {
    if (m->values.rows() != n || m->values.cols() != n)
      throw ValidationError("kernel matrix shape does not match site space");
    kernel = m->values;
  } else if (const auto* s = std::get_if<ShrunkSineSpec>(&spec)) {
    if (!(s->density > 0.0)) throw ValidationError("sine kernel density must be positive");
    kernel = sine_kernel(space, s->alpha, s->density);
    rescalable = true;
  } else if (const auto* r = std::get_if<RbfContractionSpec>(&spec)) {
    if (!(r->lengthscale > 0.0) || !(r->scale > 0.0))
      throw ValidationError("rbf kernel lengthscale and scale must be positive");
    kernel = rbf_kernel(space, r->lengthscale, r->scale);
    rescalable = true;
  } else if (const auto* rc = std::get_if<RandomContractionSpec>(&spec)) {
    if (!(rc->lambda_max > 0.0) || rc->lambda_max > 1.0 - eps)
      throw ValidationError("random contraction lambda_max must lie in (0, 1-eps]");
    Eigen::MatrixXd sym = random_psd_symmetrized(n, rc->seed, rc->lambda_max);
    kernel = unsymmetrize_weighted(sym, space);
  } else {
    throw ValidationError("unknown kernel spec");
  }

  Eigen::MatrixXd sym = symmetrize_weighted(kernel, space);
  double herm = (sym - sym.transpose()).cwiseAbs().maxCoeff();
  if (herm > kHermiticityTol)
    throw ValidationError("kernel is not Hermitian on the weighted space");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()));
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (lo < -kNegativeEigTol)
    throw ValidationError("kernel has a negative eigenvalue: " + std::to_string(lo));

  if (hi > 1.0 - eps) {
    if (!rescalable)
      throw ValidationError("kernel spectrum exceeds 1 - eps and this spec is not rescalable");
    kernel *= (1.0 - eps) / hi;
  }

  KernelOperator op(space, std::move(kernel), eps);
  if (op.evals_.maxCoeff() > 1.0 - eps + 1e-12)
    throw ValidationError("kernel spectrum still exceeds 1 - eps after rescaling");
  return op;
}

KernelDiagnostics validate_kernel(const KernelOperator& kernel) {
  KernelDiagnostics diag;
  const Eigen::MatrixXd& s = kernel.symmetrized();
  diag.hermiticity_residual = (s - s.transpose()).cwiseAbs().maxCoeff();
  diag.lambda_min = kernel.eigenvalues().minCoeff();
  diag.lambda_max = kernel.eigenvalues().maxCoeff();
  diag.trace = kernel.weighted_trace();
  diag.margin = 1.0 - diag.lambda_max;

  if (diag.hermiticity_residual > kHermiticityTol)
    diag.violations.push_back("hermiticity violated");
  if (diag.lambda_min < -kNegativeEigTol)
    diag.violations.push_back("negative eigenvalue");
  if (diag.lambda_max >= 1.0 - 1e-12)
    diag.violations.push_back("strictness violated");
  else if (diag.lambda_max > 1.0 - kernel.epsilon() + 1e-12)
    diag.violations.push_back("spectral margin violated");
  if (!std::isfinite(diag.trace)) diag.violations.push_back("trace not finite");

  diag.ok = diag.violations.empty();
  return diag;
}

InteractionOperator::InteractionOperator(SiteSpace space, Eigen::MatrixXd j_values)
    : space_(std::move(space)), j_(std::move(j_values)) {
  if (j_.rows() != space_.size() || j_.cols() != space_.size())
    throw ValidationError("interaction matrix shape does not match site space");
  ell_ = symmetrize_weighted(j_, space_);
}

InteractionOperator InteractionOperator::from_kernel(const KernelOperator& kernel) {
  return interaction_operator(kernel);
}

Eigen::MatrixXd InteractionOperator::recover_kernel() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ell_ + ell_.transpose()));
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) lam[i] = lam[i] / (1.0 + lam[i]);
  Eigen::MatrixXd sym_k =
      es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return unsymmetrize_weighted(sym_k, space_);
}

InteractionOperator interaction_operator(const KernelOperator& kernel) {
  double lam_max = kernel.eigenvalues().maxCoeff();
  if (lam_max >= 1.0 - 1e-12)
    throw NumericalAbort("1 - K is numerically singular: spectral margin " +
                         std::to_string(1.0 - lam_max));
  Eigen::VectorXd lam = kernel.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) lam[i] = lam[i] / (1.0 - lam[i]);
  Eigen::MatrixXd sym_j = kernel.eigenvectors() * lam.asDiagonal() *
                          kernel.eigenvectors().transpose();
  sym_j = 0.5 * (sym_j + sym_j.transpose());
  return InteractionOperator(kernel.space(),
                             unsymmetrize_weighted(sym_j, kernel.space()));
}

} // namespace dppdyn
