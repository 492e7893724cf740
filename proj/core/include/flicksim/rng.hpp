#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace flicksim {

// Deterministic PRNG built on splitmix64. The standard <random>
// distributions are implementation-defined, so everything that feeds the
// event stream draws from this class instead; replay equality depends on it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n == 0");
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, no state carried between calls.
  double normal(double mean, double stddev) {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  int poisson(double lambda) {
    if (lambda < 0 || !std::isfinite(lambda)) {
      throw std::invalid_argument("poisson: bad lambda");
    }
    if (lambda == 0) return 0;
    if (lambda < 64.0) {
      // Knuth's multiplication method.
      double limit = std::exp(-lambda);
      double p = 1.0;
      int k = 0;
      do {
        ++k;
        p *= uniform();
      } while (p > limit);
      return k - 1;
    }
    double x = normal(lambda, std::sqrt(lambda));
    return x < 0 ? 0 : static_cast<int>(x + 0.5);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t hash_mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return hash_mix(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

// FNV-1a.
inline std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Substream derivation: per-user, per-day streams are independent of the
// order other streams are consumed in, so a failed recommendation request
// (or concurrency) cannot perturb unrelated draws.
inline Rng substream(std::uint64_t master, std::string_view tag,
                     std::uint64_t a = 0, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
  std::uint64_t h = hash_combine(master, hash_str(tag));
  h = hash_combine(h, a);
  h = hash_combine(h, b);
  h = hash_combine(h, c);
  return Rng(h);
}

}  // namespace flicksim
