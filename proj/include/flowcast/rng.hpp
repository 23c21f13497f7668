// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace flowcast {

// SplitMix64 finalizer, used to derive independent RNG streams from
// (seed, stream-id) pairs so parallel and serial generation agree.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream)));
}

// Distribution helpers on raw engine output. <random> distributions are
// implementation-defined, so using them would tie "identical datasets from
// identical seeds" to one standard library; these are stable everywhere.
inline double u01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform_real(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * u01(g);
}

// Inclusive bounds. Modulo bias is ~2^-50 for the tiny ranges used here.
inline std::int64_t uniform_int(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(g() % span);
}

inline double log_uniform(std::mt19937_64& g, double lo, double hi) {
  return std::exp(uniform_real(g, std::log(lo), std::log(hi)));
}

inline double exponential(std::mt19937_64& g, double rate) {
  return -std::log1p(-u01(g)) / rate;
}

template <typename T>
void shuffle_portable(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_int(g, 0, static_cast<std::int64_t>(i) - 1))]);
  }
}

}  // namespace flowcast
