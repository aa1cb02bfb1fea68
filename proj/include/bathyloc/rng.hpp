#ifndef BATHYLOC_RNG_HPP
#define BATHYLOC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace bathyloc {

/// SplitMix64 mixing step (Steele, Lea, Flood; public domain reference code).
/// Used to derive independent seed streams from a master seed so that results
/// are reproducible regardless of worker count or execution order.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic child seed: hash-chain the master seed with stream indices.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                           std::uint64_t b = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(a)) ^ splitmix64(~b));
}

/// Seeded random stream. Gaussian draws use Box-Muller without pair caching so
/// the sequence of underlying engine states is a pure function of the call
/// sequence (no hidden state, identical across standard library versions).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw. Consumes exactly two engine outputs.
  double gaussian() {
    // offset keeps u1 strictly inside (0,1) so the log stays finite
    const double u1 = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

private:
  std::mt19937_64 gen_;
};

} // namespace bathyloc

#endif
