#include "dppdyn/configuration.hpp"

#include <algorithm>

#include "dppdyn/errors.hpp"

namespace dppdyn {

Configuration::Configuration(std::vector<int> sites, int n)
    : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  for (size_t k = 0; k < sites_.size(); ++k) {
    int x = sites_[k];
    if (x < 0 || x >= n)
      throw ValidationError("configuration site index out of range");
    if (k > 0 && sites_[k - 1] == x)
      throw ValidationError("configuration must be simple (no repeated sites)");
  }
}

Configuration Configuration::from_mask(std::uint64_t mask, int n) {
  if (n > 64) throw ValidationError("bitmask configurations require n <= 64");
  Configuration c;
  for (int i = 0; i < n; ++i)
    if (mask & (1ULL << i)) c.sites_.push_back(i);
  return c;
}

bool Configuration::contains(int x) const {
  return std::binary_search(sites_.begin(), sites_.end(), x);
}

std::uint64_t Configuration::mask() const {
  std::uint64_t m = 0;
  for (int x : sites_) {
    if (x >= 64) throw ValidationError("bitmask configurations require n <= 64");
    m |= (1ULL << x);
  }
  return m;
}

Configuration Configuration::with(int x) const {
  if (contains(x)) throw ValidationError("site already occupied");
  Configuration c(*this);
  c.sites_.insert(std::upper_bound(c.sites_.begin(), c.sites_.end(), x), x);
  return c;
}

Configuration Configuration::without(int x) const {
  if (!contains(x)) throw ValidationError("site not occupied");
  Configuration c(*this);
  c.sites_.erase(std::lower_bound(c.sites_.begin(), c.sites_.end(), x));
  return c;
}

} // namespace dppdyn
