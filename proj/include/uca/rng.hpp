#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace uca {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Seed of an independent substream, a pure function of (seed, id).
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t id) {
  return mix64(mix64(seed) ^ mix64(id + 0x632BE59BD9B4E019ULL));
}

// Seed for a named pipeline stage; stages do not shift each other.
constexpr std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) {
  return substream_seed(master, fnv1a64(stage));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Rng make_substream(std::uint64_t seed, std::uint64_t id) {
  return Rng(substream_seed(seed, id));
}

}  // namespace uca
