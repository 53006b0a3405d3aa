#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace dr {

// mt19937_64 output is specified bit-exactly by the standard; the helpers
// below avoid the implementation-defined std distributions so seeded runs
// agree across standard libraries.
using Rng = std::mt19937_64;

/// Seed of the stream owned by sample `index` of a seeded pipeline run.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  return master + index;
}

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace dr
