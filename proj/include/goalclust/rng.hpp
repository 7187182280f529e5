#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace goalclust {

// Everything seeded must be byte-reproducible across platforms, so this
// avoids std::shuffle / std::uniform_int_distribution (their output is
// implementation-defined). mt19937_64 itself has a standard-fixed sequence.

inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Mixes a stream label into a base seed so distinct stages draw from
/// independent deterministic streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Unbiased draw from [0, n) via rejection sampling. n must be positive.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

/// Fisher-Yates shuffle with explicit draws (portable, unlike std::shuffle).
template <typename T>
void shuffle_in_place(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

/// First k elements of a seeded shuffle of `values` (order randomized).
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> values, std::size_t k,
                                          std::mt19937_64& rng) {
  shuffle_in_place(values, rng);
  if (k < values.size()) values.resize(k);
  return values;
}

}  // namespace goalclust
