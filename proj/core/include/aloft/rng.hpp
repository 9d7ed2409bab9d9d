#ifndef ALOFT_RNG_HPP
#define ALOFT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace aloft {

// Deterministic stream derivation. Every replicate / bootstrap draw gets its
// own generator keyed by (master seed, stream indices), so results do not
// depend on scheduling or degree of parallelism.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> stream) {
  std::uint64_t s = splitmix64(seed);
  for (std::uint64_t v : stream) s = splitmix64(s ^ splitmix64(v + 0x953a5acdULL));
  return s;
}

// Thin wrapper around mt19937_64 with fully specified double transforms.
// std::*_distribution is implementation-defined; we avoid it so that a given
// (seed, stream) always yields the same values.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream)
      : gen_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    // u1 in (0, 1] keeps the log finite
    double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Exponential(1).
  double exponential() { return -std::log1p(-uniform()); }

  std::mt19937_64& raw() { return gen_; }

private:
  std::mt19937_64 gen_;
};

}  // namespace aloft

#endif
