#pragma once

// Riemann sums S_pi(t, x) of the cell-averaged diffusion against Brownian
// increments, the reference integral I(t, x) (Ito sum plus half the
// grad_sigma.sigma time integral on the fine grid), and the Monte Carlo
// studies of |S_pi - I| moments across partition meshes. One fine-grid
// solution feeds both S_pi and I, so the difference isolates partition error
// from solver error.

#include <cstdint>
#include <optional>
#include <vector>

#include "sdeflow/coefficients.hpp"
#include "sdeflow/geometry.hpp"
#include "sdeflow/paths.hpp"
#include "sdeflow/solver.hpp"
#include "sdeflow/stats.hpp"

namespace sdeflow {

struct RiemannSumResult {
  double t = 0.0;
  Vec s_pi;
  Vec i_ref;
  double diff_norm = 0.0;
};

struct MomentEstimate {
  std::vector<double> meshes;   // strictly decreasing
  std::vector<double> moments;  // E-hat |S_pi - I|^(2p) per mesh
  double p = 2.0;
  int replicas = 0;
  bool exact_zero = false;               // all moments vanish (e.g. constant sigma)
  std::optional<RateFit> fitted_rate;    // log-log rate; absent when exact_zero
};

// sigma evaluated along a solution, ready for cell averaging
std::vector<std::pair<double, Mat>> sigma_samples(const ReflectedSolution& solution,
                                                  const CoefficientField& field);

// sum_k cell_average(sigma(X_.), t_k, t_{k+1}) . (B_{t_{k+1}} - B_{t_k}) over
// the partition cells up to t (t must be a partition time; the partition must
// be nested in the solution grid).
Vec riemann_sum(const ReflectedSolution& solution, const CoefficientField& field,
                const BrownianPath& path, const Partition& partition, double t);

// Same, reusing precomputed sigma samples (identical arithmetic).
Vec riemann_sum(const std::vector<std::pair<double, Mat>>& samples,
                const ReflectedSolution& solution, const BrownianPath& path,
                const Partition& partition, double t);

// Prefix values of the Riemann sum at every partition time up to t_end.
std::vector<Vec> riemann_prefix(const std::vector<std::pair<double, Mat>>& samples,
                                const ReflectedSolution& solution, const BrownianPath& path,
                                const Partition& partition);

// Left-endpoint Ito sum of sigma(X) dB on the fine grid plus the trapezoidal
// 1/2 integral of (grad_sigma . sigma)(X) ds, both up to grid time t.
Vec reference_integral(const ReflectedSolution& solution, const CoefficientField& field,
                       const BrownianPath& path, double t);

// S_pi and I on one solution, bundled with diff_norm = |s_pi - i_ref|.
RiemannSumResult riemann_vs_reference(const ReflectedSolution& solution,
                                      const CoefficientField& field, const BrownianPath& path,
                                      const Partition& partition, double t);

struct ConvergenceStudy {
  std::vector<double> meshes;            // one per study level
  std::vector<MomentEstimate> per_x0;    // one per initial point
  MomentEstimate sup_over_x0;            // E-hat of the per-replica sup
  // raw per-replica moments (replica x level), kept for bootstrap intervals
  std::vector<std::vector<double>> sup_samples;
  std::vector<std::vector<double>> center_samples;  // for x0_set[center_index]
  std::size_t center_index = 0;
};

struct DyadicRange {
  int lo = 4;
  int hi = 9;
};

// For each replica: one path at `fine_level`, one solve per initial point,
// S_pi at every dyadic study level and I on the fine grid, all at t = t_end.
// Aggregates E-hat |S_pi - I|^(2p) per initial point and for the sup over
// initial points. Requires replicas >= 30 and fine_level > levels.hi.
ConvergenceStudy convergence_study(const Domain& domain, const CoefficientField& field,
                                   const std::vector<Vec>& x0_set, double p, DyadicRange levels,
                                   int fine_level, int replicas, std::uint64_t master_seed,
                                   int workers = 1);

// E-hat[ sup over partition times of |S_pi(., x) - S_pi(., y)|^p ] on common
// paths (the two-point motion gap). raw_out, when given, receives the
// per-replica sup^p values.
double two_point_gap(const Domain& domain, const CoefficientField& field, const Vec& x,
                     const Vec& y, const Partition& partition, int fine_level, double p,
                     int replicas, std::uint64_t master_seed, int workers = 1,
                     std::vector<double>* raw_out = nullptr);

}  // namespace sdeflow
