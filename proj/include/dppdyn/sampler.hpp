#ifndef DPPDYN_SAMPLER_HPP
#define DPPDYN_SAMPLER_HPP

#include <Eigen/Dense>
#include <vector>

#include "dppdyn/configuration.hpp"
#include "dppdyn/kernel.hpp"
#include "dppdyn/rng.hpp"

namespace dppdyn {

/// Exact draw from the determinantal process by the spectral method:
/// each eigenvector of S = D^{1/2} K D^{1/2} is kept independently with
/// probability equal to its eigenvalue, then the induced projection kernel
/// is sampled point by point with conditional downdates.
///
/// Stream consumption order (one word per draw): n Bernoulli uniforms, one
/// per eigenvalue in ascending stored order, then one selection uniform per
/// retained point. Throws NumericalAbort if a conditional variance drops
/// below -1e-8 (loss of positive semidefiniteness).
Configuration sample_dpp(const KernelOperator& kernel, SeededStream& rng);

/// Monte Carlo correlation estimators with binomial standard errors.
/// Order 1: value[i] estimates k1(x_i) = K(x_i,x_i), as freq(i in gamma)/nu_i.
/// Order 2: value(i,j) estimates k2(x_i,x_j) for i != j, as
/// freq({i,j} in gamma)/(nu_i nu_j). Diagonal of the order-2 table is zero.
struct CorrelationTable {
  int order = 1;
  Eigen::VectorXd value;
  Eigen::VectorXd stderr_value;
  Eigen::MatrixXd pair_value;
  Eigen::MatrixXd pair_stderr;
};

CorrelationTable estimate_correlation(const std::vector<Configuration>& samples,
                                      const SiteSpace& space, int order);

} // namespace dppdyn

#endif
