#include "dppdyn/site_space.hpp"

#include <cmath>
#include <unordered_set>

#include "dppdyn/errors.hpp"

namespace dppdyn {

SiteSpace::SiteSpace(std::vector<double> positions, std::vector<double> weights)
    : positions_(std::move(positions)), weights_(std::move(weights)) {
  if (positions_.empty())
    throw ValidationError("site space must contain at least one site");
  if (positions_.size() != weights_.size())
    throw ValidationError("positions and weights must have equal length");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw ValidationError("site weights must be strictly positive");
  }
  for (size_t i = 0; i < positions_.size(); ++i) {
    if (!std::isfinite(positions_[i]))
      throw ValidationError("site positions must be finite");
    for (size_t j = i + 1; j < positions_.size(); ++j) {
      if (positions_[i] == positions_[j])
        throw ValidationError("site positions must be pairwise distinct");
    }
  }
}

Eigen::VectorXd SiteSpace::sqrt_weights() const {
  Eigen::VectorXd s(size());
  for (int i = 0; i < size(); ++i) s[i] = std::sqrt(weights_[static_cast<size_t>(i)]);
  return s;
}

Eigen::VectorXd SiteSpace::weight_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(weights_.data(),
                                           static_cast<Eigen::Index>(weights_.size()));
}

SiteSpace make_grid_space(double lo, double hi, int n, WeightRule /*rule*/) {
  if (n < 1) throw ValidationError("grid size must be at least 1");
  if (!(lo < hi)) throw ValidationError("grid interval is degenerate: lo must be < hi");
  double h = (hi - lo) / n;
  std::vector<double> pos(static_cast<size_t>(n)), w(static_cast<size_t>(n), h);
  for (int i = 0; i < n; ++i) pos[static_cast<size_t>(i)] = lo + (i + 0.5) * h;
  return SiteSpace(std::move(pos), std::move(w));
}

} // namespace dppdyn
