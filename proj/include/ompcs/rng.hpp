#pragma once

#include <cstdint>
#include <random>

#include "ompcs/types.hpp"

namespace ompcs {

/// Seedable generator with platform-independent output.
///
/// The bit stream comes from std::mt19937_64, whose sequence is fixed by the
/// standard. The distributions are implemented here rather than taken from
/// <random>, because libstdc++, libc++ and MSVC disagree on how
/// std::normal_distribution and friends consume engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance
  /// (real and imaginary parts each carry variance/2).
  cplx complex_normal(double variance = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for (stream, index) under a master seed:
///   splitmix64(splitmix64(master ^ splitmix64(stream)) + index).
/// Streams separate independent uses (matrix draw, per-point trials, ...).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace ompcs
