#pragma once

#include <cstdint>
#include <random>

namespace resv {

// All randomness in the simulator flows through mt19937_64 engines. The
// helpers below avoid std::uniform_*_distribution, whose output is
// implementation-defined, so a (config, seed) pair yields the same run on any
// standard library.
using Rng = std::mt19937_64;

// Independent stream ids derived from one user seed.
enum class Stream : std::uint64_t {
  kScenario = 1,
  kSelection = 2,
  kExploration = 3,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  return Rng{splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream))};
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

}  // namespace resv
