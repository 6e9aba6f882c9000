#pragma once

#include <cstdint>
#include <random>

namespace scenfuzz {

using Rng = std::mt19937_64;

/// Mixes a base seed with stream identifiers so that parallel workers and
/// repetitions draw from disjoint, reproducible streams (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace scenfuzz
