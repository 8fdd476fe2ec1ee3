#pragma once

// Discrete solutions (X, L, |L|) of the reflected SDE in Ito form. The primary
// scheme is closest-point projection Euler: propose an unconstrained Euler
// step, project back onto the closure, and book the projection residual as the
// boundary push dL. A penalization scheme and the exact one-sided Skorokhod
// map (1-d) serve as independent oracles.

#include <cstdint>
#include <vector>

#include "sdeflow/coefficients.hpp"
#include "sdeflow/geometry.hpp"
#include "sdeflow/linalg.hpp"
#include "sdeflow/paths.hpp"

namespace sdeflow {

struct ReflectedSolution {
  Partition grid{std::vector<double>{0.0, 1.0}};
  std::vector<Vec> x;                   // per grid time
  std::vector<Vec> l;                   // per grid time, prefix sums of dl
  std::vector<double> l_tv;             // per grid time, prefix sums of |dl|
  std::vector<Vec> dl;                  // per step: applied boundary push
  std::vector<std::uint8_t> boundary_flags;  // per step: reflection fired
  int substeps = 0;                     // excursion-guard activations

  // One entry per projection event (substep resolution): the boundary point
  // the state was pulled back to and the outward push applied there. This is
  // where the direction xi = push/|push| of the local-time measure lives;
  // only the projection scheme fills it.
  struct Reflection {
    std::size_t step;
    Vec point;
    Vec push;
  };
  std::vector<Reflection> reflections;

  const Vec& x_at(double t) const { return x[grid.index_of(t)]; }
  const Vec& l_at(double t) const { return l[grid.index_of(t)]; }
};

struct StepResult {
  Vec x_next;
  Vec dl;
};

// One projected Euler step: y = x_k + bt(x_k) dt + sigma(x_k) dB, then
// (x_next, dl) = (project(y).x, project(y).residual).
StepResult step_project(const Domain& domain, const CoefficientField& field, const Vec& x_k,
                        double dt, const Vec& dB);

// Projection scheme over the path's grid. Steps whose push exceeds a tenth of
// the domain diameter are retried as two half steps on the bridged midpoint
// (at most 4 splitting levels, coefficients stay frozen at the step's start so
// the applied drift/noise sum is unchanged); `substeps` counts those events.
ReflectedSolution solve(const Domain& domain, const CoefficientField& field,
                        const BrownianPath& path, const Vec& x0);

// Unconstrained Euler with restoring drift -lambda * max(phi, 0) * grad_phi;
// dl is booked as the penalty displacement per step. Throws PenaltyBlowup when
// the state escapes to 10 domain diameters.
ReflectedSolution solve_penalized(const Domain& domain, const CoefficientField& field,
                                  const BrownianPath& path, const Vec& x0, double lambda);

// Exact one-sided reflection at 0 for d = 1, sigma = 1, b = 0:
// X_t = x0 + W_t + L_t with L_t = max(0, sup_{s<=t} (-x0 - W_s)).
ReflectedSolution halfline_oracle(const BrownianPath& path, double x0);

// Local-time attribution band: factor * sqrt(dt) * sup-norm hint of sigma.
double eps_boundary(const CoefficientField& field, double dt, double factor = 2.0);

}  // namespace sdeflow
