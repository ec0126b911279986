#pragma once

// Seeded random streams with deterministic substream derivation.
//
// Replicate t of a run with master seed s draws from a stream seeded with
// substream_seed(s, t), so results do not depend on evaluation order or on
// how replicates are distributed over threads. The engine is std::mt19937_64
// (fully specified by the standard, hence portable) and normal variates are
// produced by quantile inversion from the 53-bit uniform stream.

#include <cstdint>
#include <random>

#include "trendtest/normal.hpp"

namespace trendtest::rng {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 1));
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0,1); never returns an endpoint, so
  // quantile inversion stays finite.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return mean + sd * normal_quantile(uniform01());
  }

  bool coin() { return (next_u64() & 1ull) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace trendtest::rng
