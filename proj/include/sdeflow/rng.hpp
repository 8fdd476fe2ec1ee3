#pragma once

// Deterministic randomness: stateless keyed normals for path construction
// (value at a time depends only on (seed, time bits, coordinate), so grids can
// be refined in any order), a documented seed splitter for Monte Carlo
// replicas, and a small sequential engine whose output does not depend on the
// standard library's distribution implementations.

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

namespace sdeflow {

inline constexpr double kPi = 3.14159265358979323846;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// uniform in (0,1), 53 significant bits
inline double u01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

// standard normal as a pure function of the key (Box-Muller, first component)
inline double normal_from_key(std::uint64_t key) {
  const double u1 = u01(mix64(key));
  const double u2 = u01(mix64(key ^ 0xD1B54A32D192ED03ull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// key for the Brownian value at time t, coordinate c
inline std::uint64_t path_key(std::uint64_t seed, double t, int coord) {
  std::uint64_t h = mix64(seed ^ 0x42524944u);  // "BRID"
  h = mix64(h ^ std::bit_cast<std::uint64_t>(t));
  return mix64(h + static_cast<std::uint64_t>(coord) * 0x9E3779B97F4A7C15ull);
}

// replica r of a master seed; documented splitting function so that runs can
// be replayed replica-by-replica
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t replica) {
  return mix64(mix64(master ^ 0x5345454453504C49ull) + replica * 0x9E3779B97F4A7C15ull);
}

// Sequential generator used for sampling points and bootstrap resampling.
// Wraps mt19937_64 but derives doubles/indices from raw 64-bit output only.
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return u01(engine_()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // unbiased enough for resampling purposes (n << 2^64)
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sdeflow
