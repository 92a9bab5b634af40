#ifndef DPPDYN_CONFIGURATION_HPP
#define DPPDYN_CONFIGURATION_HPP

#include <cstdint>
#include <vector>

namespace dppdyn {

/// A simple (multiplicity-free) finite configuration: a sorted set of site
/// indices in [0, n). Value type, cheap to copy at desk scale.
class Configuration {
public:
  Configuration() = default;

  /// Validates: indices distinct and within [0, n).
  Configuration(std::vector<int> sites, int n);

  static Configuration empty() { return Configuration(); }
  static Configuration from_mask(std::uint64_t mask, int n);

  int size() const { return static_cast<int>(sites_.size()); }
  bool is_empty() const { return sites_.empty(); }
  const std::vector<int>& sites() const { return sites_; }
  int site(int k) const { return sites_[static_cast<size_t>(k)]; }
  bool contains(int x) const;

  /// Requires n <= 64.
  std::uint64_t mask() const;

  Configuration with(int x) const;    // x must be absent
  Configuration without(int x) const; // x must be present

  bool operator==(const Configuration& other) const { return sites_ == other.sites_; }

private:
  std::vector<int> sites_;
};

inline int popcount64(std::uint64_t m) { return __builtin_popcountll(m); }

} // namespace dppdyn

#endif
