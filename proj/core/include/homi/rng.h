#pragma once

#include <cstdint>
#include <random>

namespace homi {

/// Project-wide seeded generator. Every stochastic operation takes one of
/// these explicitly; nothing draws from global state.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) {
  return Rng(seed);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

/// Derives an independent stream for sub-task `salt` of a seeded job.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace homi
