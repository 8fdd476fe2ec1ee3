#pragma once

// Brownian paths on refinable grids. A sampled path's value at time t is a
// pure function of (seed, bit pattern of t): every IEEE double in [0,1] is a
// dyadic rational k/2^J, and the value at t is defined by midpoint-bridging
// between the two dyadic neighbours (k-1)/2^J and (k+1)/2^J, recursively down
// to the anchors B_0 = 0 and B_1. Sampling a grid just evaluates this global
// construction, so refinement preserves existing values bitwise and the
// refinement order is irrelevant.

#include <cstdint>
#include <utility>
#include <vector>

#include "sdeflow/linalg.hpp"

namespace sdeflow {

class Partition {
 public:
  // Strictly increasing times in [0,1], starting at 0, at least two points.
  explicit Partition(std::vector<double> times);

  // k / 2^level for k = 0 .. t_end * 2^level (t_end must sit on the grid).
  static Partition dyadic(int level, double t_end = 1.0);

  const std::vector<double>& times() const { return t_; }
  std::size_t size() const { return t_.size(); }
  std::size_t cells() const { return t_.size() - 1; }
  double t_end() const { return t_.back(); }
  double mesh() const;

  bool contains_time(double t) const;
  std::size_t index_of(double t) const;  // OffGrid when t is not a grid time

  // every time of `coarser` occurs in `finer`
  static bool nested(const Partition& finer, const Partition& coarser);

 private:
  std::vector<double> t_;
};

class BrownianPath {
 public:
  static BrownianPath sample(std::uint64_t seed, const Partition& grid, int dim);

  // Fixed values (test fixtures, replayed dumps). Refinement of such a path
  // bridges between the stored neighbours keyed by (seed, time).
  static BrownianPath from_values(Partition grid, std::vector<Vec> values,
                                  std::uint64_t seed = 0);

  const Partition& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  const Vec& value(std::size_t index) const { return values_[index]; }
  const Vec& value_at(double t) const { return values_[grid_.index_of(t)]; }

  // values(t) - values(s); both must be grid times
  Vec increment(double s, double t) const;

  // Same path on a finer grid (NotNested when `finer` does not contain the
  // current grid). Existing (time, value) pairs are preserved exactly.
  BrownianPath refine(const Partition& finer) const;

  // Value at an arbitrary time in [0,1] (used by the solver's local
  // sub-stepping). For sampled paths this is the global construction; for
  // fixed-value paths it bridges between the enclosing grid values.
  Vec value_global(double t) const;

 private:
  BrownianPath(Partition grid, std::vector<Vec> values, std::uint64_t seed, int dim, bool sampled)
      : grid_(std::move(grid)),
        values_(std::move(values)),
        seed_(seed),
        dim_(dim),
        sampled_(sampled) {}

  Partition grid_;
  std::vector<Vec> values_;
  std::uint64_t seed_ = 0;
  int dim_ = 1;
  bool sampled_ = true;
};

// Trapezoidal average (1/(u-s)) * integral_s^u f dr of matrix samples given on
// an ascending time grid that contains s and u (InsufficientSamples
// otherwise; requires u > s).
Mat cell_average(const std::vector<std::pair<double, Mat>>& samples, double s, double u);

}  // namespace sdeflow
