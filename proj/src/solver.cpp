#include "sdeflow/solver.hpp"

#include <algorithm>
#include <cmath>

#include "sdeflow/errors.hpp"

namespace sdeflow {

StepResult step_project(const Domain& domain, const CoefficientField& field, const Vec& x_k,
                        double dt, const Vec& dB) {
  Vec y = x_k;
  Vec bt(x_k.size());
  field.ito_drift_into(x_k, bt);
  axpy(dt, bt, y);
  field.sigma(x_k).mul_acc(dB, y);
  ProjectResult pr = domain.project(y);
  return {std::move(pr.x), std::move(pr.residual)};
}

namespace {

struct Workspace {
  Vec bt, y, dl_step;
  Mat sig;
  explicit Workspace(std::size_t d) : bt(d), y(d), dl_step(d), sig(d, d) {}
};

// Applies the Euler increment bt*(t1-t0) + sig*(B1-B0) from x and projects,
// splitting at the bridged midpoint when the push is large. bt and sig stay
// frozen at the enclosing grid step, so the applied drift/noise telescopes to
// the unsplit increment and the discrete equation identity is preserved.
// Pushes accumulate into ws.dl_step and the event log; returns the arrival.
Vec apply_guarded(const Domain& domain, const BrownianPath& path, ReflectedSolution& sol,
                  std::size_t step, const Vec& x, double t0, double t1, const Vec& b0,
                  const Vec& b1, int depth, Workspace& ws) {
  ws.y = x;
  axpy(t1 - t0, ws.bt, ws.y);
  for (std::size_t i = 0; i < ws.y.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < ws.y.size(); ++j) s += ws.sig(i, j) * (b1[j] - b0[j]);
    ws.y[i] += s;
  }
  ProjectResult pr = domain.project(ws.y);
  if (norm(pr.residual) > 0.1 * domain.diameter() && depth < 4) {
    ++sol.substeps;
    const double tm = 0.5 * (t0 + t1);
    const Vec bm = path.value_global(tm);
    Vec xm = apply_guarded(domain, path, sol, step, x, t0, tm, b0, bm, depth + 1, ws);
    return apply_guarded(domain, path, sol, step, xm, tm, t1, bm, b1, depth + 1, ws);
  }
  if (norm(pr.residual) > 0.0) sol.reflections.push_back({step, pr.x, pr.residual});
  ws.dl_step += pr.residual;
  return std::move(pr.x);
}

ReflectedSolution init_solution(const BrownianPath& path, const Vec& x0) {
  ReflectedSolution sol;
  sol.grid = path.grid();
  const std::size_t n = sol.grid.cells();
  sol.x.reserve(n + 1);
  sol.x.push_back(x0);
  sol.l.reserve(n + 1);
  sol.l.emplace_back(x0.size());
  sol.l_tv.reserve(n + 1);
  sol.l_tv.push_back(0.0);
  sol.dl.reserve(n);
  sol.boundary_flags.reserve(n);
  return sol;
}

}  // namespace

ReflectedSolution solve(const Domain& domain, const CoefficientField& field,
                        const BrownianPath& path, const Vec& x0) {
  if (domain.contains(x0) == Classification::Exterior)
    throw Error(Errc::InvalidPoint, "initial point lies outside the closure");
  ReflectedSolution sol = init_solution(path, x0);
  const auto& t = sol.grid.times();
  Workspace ws(x0.size());
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    ws.dl_step.fill(0.0);
    field.ito_drift_into(sol.x[k], ws.bt);
    field.sigma_into(sol.x[k], ws.sig);
    Vec xn = apply_guarded(domain, path, sol, k, sol.x[k], t[k], t[k + 1], path.value(k),
                           path.value(k + 1), 0, ws);
    const double push = norm(ws.dl_step);
    sol.boundary_flags.push_back(push > 0.0 ? 1 : 0);
    sol.l.push_back(sol.l.back() + ws.dl_step);
    sol.l_tv.push_back(sol.l_tv.back() + push);
    sol.dl.push_back(ws.dl_step);
    sol.x.push_back(std::move(xn));
  }
  return sol;
}

ReflectedSolution solve_penalized(const Domain& domain, const CoefficientField& field,
                                  const BrownianPath& path, const Vec& x0, double lambda) {
  if (domain.contains(x0) == Classification::Exterior)
    throw Error(Errc::InvalidPoint, "initial point lies outside the closure");
  ReflectedSolution sol = init_solution(path, x0);
  const auto& t = sol.grid.times();
  const double blowup = 10.0 * domain.diameter();
  Workspace ws(x0.size());
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const Vec& xk = sol.x[k];
    const double dt = t[k + 1] - t[k];
    ws.y = xk;
    field.ito_drift_into(xk, ws.bt);
    axpy(dt, ws.bt, ws.y);
    field.sigma_into(xk, ws.sig);
    const Vec dB = path.value(k + 1) - path.value(k);
    ws.sig.mul_acc(dB, ws.y);

    const double pen = std::max(domain.phi(xk), 0.0);
    Vec push(xk.size());
    if (pen > 0.0 && lambda > 0.0) {
      push = domain.grad_phi(xk);
      push *= lambda * pen * dt;
    }
    ws.y -= push;

    if (norm(ws.y) > blowup)
      throw Error(Errc::PenaltyBlowup, "penalized trajectory escaped the domain scale");
    sol.boundary_flags.push_back(norm(push) > 0.0 ? 1 : 0);
    sol.l.push_back(sol.l.back() + push);
    sol.l_tv.push_back(sol.l_tv.back() + norm(push));
    sol.dl.push_back(std::move(push));
    sol.x.push_back(ws.y);
  }
  return sol;
}

ReflectedSolution halfline_oracle(const BrownianPath& path, double x0) {
  if (path.dim() != 1) throw Error(Errc::InvalidPoint, "halfline oracle is 1-dimensional");
  if (x0 < 0.0) throw Error(Errc::InvalidPoint, "halfline oracle needs x0 >= 0");
  ReflectedSolution sol;
  sol.grid = path.grid();
  const std::size_t n = sol.grid.cells();
  double running = 0.0;  // sup_{s<=t} (-x0 - W_s), clipped at 0
  sol.x.push_back(Vec{x0});
  sol.l.push_back(Vec{0.0});
  sol.l_tv.push_back(0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double w = path.value(k)[0];
    const double prev = running;
    running = std::max(running, -x0 - w);
    sol.x.push_back(Vec{x0 + w + running});
    sol.l.push_back(Vec{running});
    sol.l_tv.push_back(running);
    sol.dl.push_back(Vec{running - prev});
    sol.boundary_flags.push_back(running > prev ? 1 : 0);
  }
  return sol;
}

double eps_boundary(const CoefficientField& field, double dt, double factor) {
  return factor * std::sqrt(dt) * field.sigma_sup_norm_hint();
}

}  // namespace sdeflow
