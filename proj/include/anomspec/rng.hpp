#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace anomspec {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); used to give each tree its own stream.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// The helpers below are written out instead of using <random> distributions so
// that generated data and forests are bit-identical across standard libraries.

/// Uniform on [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer on [0, n); n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace anomspec
