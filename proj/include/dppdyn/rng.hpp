#ifndef DPPDYN_RNG_HPP
#define DPPDYN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace dppdyn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replica `index` of a run with the given master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

/// Deterministic random stream. All consumers draw through the typed helpers
/// below; each helper documents how many raw 64-bit words it consumes, so a
/// run is bit-reproducible given (seed, call sequence).
class SeededStream {
public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1). One raw word.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [-1,1]. One raw word.
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

  /// Exponential with the given rate. One raw word.
  double next_exponential(double rate) { return -std::log(next_unit()) / rate; }

  /// Standard normal via Box-Muller. Two raw words.
  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Uniform integer in [0, bound). One raw word; negligible modulo bias for
  /// the desk-scale bounds used here.
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

private:
  std::mt19937_64 engine_;
};

} // namespace dppdyn

#endif
