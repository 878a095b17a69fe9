#pragma once

#include <cstdint>

namespace dg {

// Counter-based generator: the value at (seed, index) is a pure function of
// both, so parallel evaluation order cannot change any stream.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27; x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Uniform double in [0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(counter_hash(seed, index) >> 11) * 0x1.0p-53;
}

}  // namespace dg
