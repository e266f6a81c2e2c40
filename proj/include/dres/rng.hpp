#pragma once

// Counter-based random numbers: every draw is a pure function of (seed, stream, counter),
// so particle i always receives the same numbers however the work is split over threads.
// Stream splitting rule: particle index i uses stream i; its k-th uniform uses counter k.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dres {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const { return mix64(key_ ^ mix64(counter)); }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Standard normal pair from uniforms at counters (2k, 2k+1), Box-Muller.
  void normal_pair(std::uint64_t k, double& z0, double& z1) const {
    const double u1 = 1.0 - uniform(2 * k);  // (0, 1]
    const double u2 = uniform(2 * k + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2 * std::numbers::pi * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
  }

 private:
  std::uint64_t key_;
};

}  // namespace dres
