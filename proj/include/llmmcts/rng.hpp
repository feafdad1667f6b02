#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace llmmcts {

// mt19937_64 is fully specified by the standard; the helpers below avoid the
// implementation-defined std distributions so streams replay bit-for-bit.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed for the i-th independent stream under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i) {
  return splitmix64(splitmix64(master) ^ (i * 0xd1b54a32d192ed03ull + 1));
}

// Stable stream number for a name (FNV-1a), for use with derive_seed.
inline std::uint64_t stream_id(std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Uniform in [0, 1) with 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniform integer in [0, n), n > 0, unbiased.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace llmmcts
