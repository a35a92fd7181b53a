#pragma once

// Deterministic random helpers. std::uniform_real_distribution and friends are
// implementation-defined, so every draw that must reproduce bit-for-bit goes
// through these instead.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace adsurv {

// SplitMix64: used to derive independent stream seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform in [0, 1) built from the top 53 bits of one mt19937_64 draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n). Modulo bias is irrelevant here; determinism is not.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

// Standard normal via Box-Muller (no cached spare, two draws per call).
inline double normal01(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline double lognormal(std::mt19937_64& rng, double mu_log, double sigma_log) {
  return std::exp(mu_log + sigma_log * normal01(rng));
}

// Fisher-Yates with our own index draws (std::shuffle is not portable).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Binomial(n, p) sampler. Uses geometric skips when p is small so that
// thousand-impression days do not cost a thousand draws, and a rounded
// normal when the variance is large enough that the approximation error is
// far below the generator's own noise floor.
inline std::uint64_t binomial(std::mt19937_64& rng, std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial(rng, n, 1.0 - p);
  const double variance = static_cast<double>(n) * p * (1.0 - p);
  if (variance > 150.0) {
    const double mean = static_cast<double>(n) * p;
    double draw = std::round(mean + std::sqrt(variance) * normal01(rng));
    if (draw < 0.0) draw = 0.0;
    if (draw > static_cast<double>(n)) draw = static_cast<double>(n);
    return static_cast<std::uint64_t>(draw);
  }
  std::uint64_t count = 0;
  if (p < 0.1) {
    const double log_q = std::log1p(-p);
    double i = 0.0;
    while (true) {
      double u = uniform01(rng);
      while (u <= 0.0) u = uniform01(rng);
      i += std::floor(std::log(u) / log_q) + 1.0;
      if (i > static_cast<double>(n)) break;
      ++count;
    }
  } else {
    for (std::uint64_t i = 0; i < n; ++i) {
      if (uniform01(rng) < p) ++count;
    }
  }
  return count;
}

}  // namespace adsurv
