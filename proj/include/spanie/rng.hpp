#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spanie {

// All randomness in the library flows through one engine type so that a seed
// fully determines every artifact.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). std::uniform_int_distribution produces different
// sequences across standard library implementations; this rejection sampler
// does not, which keeps seeded corpora and shuffles reproducible everywhere.
inline std::uint64_t rng_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

// Uniform integer in [lo, hi], inclusive.
inline int rng_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng_below(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

// Uniform double in [0, 1).
inline double rng_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller normal sample (portable, unlike std::normal_distribution).
inline double rng_normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
  double u1 = rng_unit(rng);
  while (u1 <= 0.0) u1 = rng_unit(rng);
  const double u2 = rng_unit(rng);
  const double two_pi = 6.283185307179586476925286766559;
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Fisher-Yates shuffle driven by rng_below.
template <typename T>
void rng_shuffle(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace spanie
