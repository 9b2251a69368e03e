#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lipar {

/// Bijective 64-bit mixer (splitmix64 finalizer).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a coordinate tuple.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::int64_t> coords) {
  std::uint64_t h = splitmix64(seed);
  for (auto c : coords) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
  return h;
}

using Rng = std::mt19937_64;

}  // namespace lipar
