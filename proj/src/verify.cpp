#include "dppdyn/verify.hpp"

#include <cmath>

#include "dppdyn/generator.hpp"
#include "dppdyn/papangelou.hpp"
#include "dppdyn/rng.hpp"

namespace dppdyn {

namespace {

double hash_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<double> random_table(SeededStream& rng, std::uint64_t states) {
  std::vector<double> f(states);
  for (auto& v : f) v = rng.next_symmetric();
  return f;
}

} // namespace

SiteConfigFunction hash_test_function(std::uint64_t seed) {
  return [seed](int x, const Configuration& gamma) {
    std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(x) + 1) ^
                                 splitmix64(gamma.mask() * 0x9e3779b97f4a7c15ULL + 7));
    return 2.0 * hash_unit(h) - 1.0;
  };
}

std::vector<CheckResult> run_verification(const KernelOperator& kernel,
                                          const InteractionOperator& j,
                                          const RateFamily& family,
                                          const VerifyOptions& options) {
  std::vector<CheckResult> results;
  const int n = j.size();
  const std::vector<double>& nu = j.space().weights();

  {
    CheckResult c;
    c.name = "kernel_valid";
    KernelDiagnostics diag = validate_kernel(kernel);
    c.passed = diag.ok;
    c.value = diag.lambda_max;
    c.threshold = 1.0 - kernel.epsilon();
    for (const std::string& v : diag.violations) {
      if (!c.detail.empty()) c.detail += "; ";
      c.detail += v;
    }
    results.push_back(c);
  }

  MeasureTable mu = exact_distribution(j, options.enumeration_limit);

  {
    CheckResult c;
    c.name = "normalization";
    c.value = std::abs(mu.sum() - 1.0);
    c.threshold = 1e-12;
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  {
    // mu(gamma + x) = mu(gamma) r(x, gamma) nu_x for every gamma, x.
    CheckResult c;
    c.name = "density_ratio";
    c.threshold = 1e-10;
    double worst = 0.0;
    for (std::uint64_t mask = 0; mask < mu.states(); ++mask) {
      Configuration gamma = Configuration::from_mask(mask, n);
      IntensityProfile prof = intensity_profile(j, gamma);
      for (int x = 0; x < n; ++x) {
        if (mask & (1ULL << x)) continue;
        double lhs = mu.prob(mask | (1ULL << x));
        double rhs = mu.prob(mask) * prof.value[x] * nu[static_cast<size_t>(x)];
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    c.value = worst;
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  {
    CheckResult c;
    c.name = "mecke_identity";
    c.threshold = 1e-10;
    double worst = 0.0;
    for (int k = 0; k < options.mecke_functions; ++k) {
      MeckeResult res = mecke_check(j, hash_test_function(options.seed + static_cast<std::uint64_t>(k)),
                                    options.enumeration_limit);
      worst = std::max(worst, res.residual);
    }
    c.value = worst;
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  {
    CheckResult c;
    c.name = "papangelou_bound";
    c.threshold = 1e-9;
    double worst = -1e300;
    for (std::uint64_t mask = 0; mask < mu.states(); ++mask)
      worst = std::max(worst, bound_check(j, Configuration::from_mask(mask, n)));
    c.value = worst;
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  const bool kawasaki = family.kind() == DynamicsKind::Kawasaki;

  if (kawasaki) {
    CheckResult c;
    c.name = "balance_residual";
    c.threshold = 1e-10;
    double worst = 0.0;
    for (std::uint64_t mask = 0; mask < mu.states(); ++mask)
      worst = std::max(worst,
                       balance_residual(j, Configuration::from_mask(mask, n), family));
    c.value = worst;
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  GeneratorMatrix q = kawasaki
                          ? kawasaki_generator(j, family, options.enumeration_limit)
                          : glauber_generator(j, family, options.enumeration_limit);

  {
    CheckResult c;
    c.name = "conservativity";
    c.threshold = 1e-12;
    c.value = q.conservativity_residual();
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  {
    CheckResult c;
    c.name = "reversibility";
    c.threshold = 1e-10;
    c.value = reversibility_check(q, mu);
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  {
    CheckResult c;
    c.name = "form_duality";
    c.threshold = 1e-10;
    SeededStream rng(options.seed ^ 0xd1ce5bb51a2e1a2eULL);
    double worst = 0.0;
    for (int k = 0; k < options.duality_pairs; ++k) {
      std::vector<double> f = random_table(rng, mu.states());
      std::vector<double> g = random_table(rng, mu.states());
      double form = dirichlet_form(j, mu, family, f, g);
      // <F, -Q G>_mu
      Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(g.size()));
      Eigen::VectorXd qg = q.matrix() * gv;
      double pairing = 0.0;
      for (std::uint64_t s = 0; s < mu.states(); ++s)
        pairing -= mu.prob(s) * f[s] * qg[static_cast<Eigen::Index>(s)];
      worst = std::max(worst, std::abs(form - pairing));
    }
    c.value = worst;
    c.passed = c.value <= c.threshold;
    results.push_back(c);
  }

  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& c : results)
    if (!c.passed) return false;
  return true;
}

} // namespace dppdyn
