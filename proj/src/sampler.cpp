#include "dppdyn/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "dppdyn/errors.hpp"

namespace dppdyn {

namespace {
constexpr double kPsdLossTol = -1e-8;
}

Configuration sample_dpp(const KernelOperator& kernel, SeededStream& rng) {
  const int n = kernel.size();
  const Eigen::VectorXd& lam = kernel.eigenvalues();
  const Eigen::MatrixXd& vecs = kernel.eigenvectors();

  std::vector<int> kept;
  kept.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    double u = rng.next_unit();
    if (u < lam[k]) kept.push_back(k);
  }
  const int m = static_cast<int>(kept.size());
  if (m == 0) return Configuration();

  // Projection kernel of the retained eigenvectors; downdated after every
  // selected point so the diagonal always holds conditional inclusion
  // intensities.
  Eigen::MatrixXd v(n, m);
  for (int c = 0; c < m; ++c) v.col(c) = vecs.col(kept[static_cast<size_t>(c)]);
  Eigen::MatrixXd proj = v * v.transpose();

  std::vector<int> picked;
  picked.reserve(static_cast<size_t>(m));
  for (int t = 0; t < m; ++t) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = proj(i, i);
      if (d < kPsdLossTol)
        throw NumericalAbort("conditional variance lost positive semidefiniteness");
      total += std::max(d, 0.0);
    }
    double u = rng.next_unit() * total;
    int chosen = -1;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += std::max(proj(i, i), 0.0);
      if (u <= acc) {
        chosen = i;
        break;
      }
    }
    if (chosen < 0) chosen = n - 1;
    picked.push_back(chosen);

    double pivot = proj(chosen, chosen);
    if (pivot <= 0.0)
      throw NumericalAbort("selected a site with nonpositive conditional variance");
    Eigen::VectorXd col = proj.col(chosen);
    proj -= (col * col.transpose()) / pivot;
  }

  std::sort(picked.begin(), picked.end());
  return Configuration(std::move(picked), n);
}

CorrelationTable estimate_correlation(const std::vector<Configuration>& samples,
                                      const SiteSpace& space, int order) {
  if (order != 1 && order != 2)
    throw ValidationError("correlation order must be 1 or 2");
  if (samples.empty())
    throw ValidationError("correlation estimation needs at least one sample");

  const int n = space.size();
  const double count = static_cast<double>(samples.size());
  CorrelationTable out;
  out.order = order;

  if (order == 1) {
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(n);
    for (const Configuration& g : samples)
      for (int x : g.sites()) freq[x] += 1.0;
    freq /= count;
    out.value = Eigen::VectorXd(n);
    out.stderr_value = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
      double nu = space.weight(i);
      out.value[i] = freq[i] / nu;
      out.stderr_value[i] = std::sqrt(freq[i] * (1.0 - freq[i]) / count) / nu;
    }
    return out;
  }

  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(n, n);
  for (const Configuration& g : samples) {
    const std::vector<int>& s = g.sites();
    for (size_t a = 0; a < s.size(); ++a)
      for (size_t b = a + 1; b < s.size(); ++b) {
        freq(s[a], s[b]) += 1.0;
        freq(s[b], s[a]) += 1.0;
      }
  }
  freq /= count;
  out.pair_value = Eigen::MatrixXd::Zero(n, n);
  out.pair_stderr = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double nunu = space.weight(i) * space.weight(j);
      out.pair_value(i, j) = freq(i, j) / nunu;
      out.pair_stderr(i, j) =
          std::sqrt(freq(i, j) * (1.0 - freq(i, j)) / count) / nunu;
    }
  return out;
}

} // namespace dppdyn
