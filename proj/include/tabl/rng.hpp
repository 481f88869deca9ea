#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tabl {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream (init, shuffle,
/// dropout, ...) from the single run seed, so experiments are
/// bit-reproducible regardless of how many streams are consumed.
inline uint64_t substream_seed(uint64_t seed, std::string_view name) {
  // FNV-1a over the name, then splitmix64 finalization.
  uint64_t h = 14695981039346656037ull;
  for (char c : name) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng make_rng(uint64_t seed, std::string_view stream) {
  return Rng(substream_seed(seed, stream));
}

}  // namespace tabl
