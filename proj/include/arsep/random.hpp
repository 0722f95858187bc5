#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace arsep {

/// splitmix64 finalizer; derives independent stream seeds from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ b);
}

using Rng = std::mt19937_64;

inline void fill_normal(Rng& rng, std::span<double> out, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = scale * normal(rng);
}

}  // namespace arsep
