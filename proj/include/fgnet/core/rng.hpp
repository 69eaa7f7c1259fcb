// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_CORE_RNG_HPP
#define FGNET_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace fgnet {

/// Seeded random stream with hand-rolled transforms.
///
/// std::mt19937_64 output is pinned by the standard; the distribution
/// adaptors are not, so uniform/normal/gumbel draws are implemented here
/// to keep results byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Gumbel(0, 1) draw: -log(-log(u)).
  double gumbel() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(-std::log(u));
  }

  /// Derive an independent child stream, mixing in a tag.
  Rng fork(std::uint64_t tag) {
    const std::uint64_t s = engine_() ^ (tag * 0x9E3779B97F4A7C15ull);
    return Rng(s);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fgnet

#endif  // FGNET_CORE_RNG_HPP
