#include "sdeflow/anticipating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdeflow/errors.hpp"
#include "sdeflow/parallel.hpp"

namespace sdeflow {

Vec draw_initial(const AnticipatingInitial& init, const BrownianPath& path,
                 const Domain& domain) {
  if (init.kind == InitialKind::FixedPoint) {
    if (domain.contains(init.fixed_point) == Classification::Exterior)
      throw Error(Errc::InvalidPoint, "fixed initial point lies outside the closure");
    return init.fixed_point;
  }
  if (path.grid().t_end() != 1.0)
    throw Error(Errc::OffGrid, "anticipating initials need a path covering [0,1]");
  const auto d = static_cast<std::size_t>(path.dim());
  Vec functional(d);
  switch (init.kind) {
    case InitialKind::ProjectedEndpoint:
      functional = path.value_at(1.0);
      break;
    case InitialKind::ProjectedMean: {
      const auto& ts = path.grid().times();
      for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double h = ts[k + 1] - ts[k];
        axpy(0.5 * h, path.value(k), functional);
        axpy(0.5 * h, path.value(k + 1), functional);
      }
      break;
    }
    case InitialKind::ProjectedMax:
      for (std::size_t c = 0; c < d; ++c) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < path.grid().size(); ++k) m = std::max(m, path.value(k)[c]);
        functional[c] = m;
      }
      break;
    case InitialKind::FixedPoint:
      break;
  }
  return domain.project(functional).x;
}

SpatialGrid SpatialGrid::inscribed(const Domain& domain, int per_axis) {
  if (per_axis < 2) throw Error(Errc::InvalidPoint, "spatial grid needs at least 2 per axis");
  SpatialGrid g;
  const auto [lo, hi] = domain.bounding_box();
  const int d = domain.dim();
  g.axes_.resize(d);
  for (int a = 0; a < d; ++a) {
    g.axes_[a].resize(per_axis);
    for (int i = 0; i < per_axis; ++i)
      g.axes_[a][i] = lo[a] + (hi[a] - lo[a]) * static_cast<double>(i) / (per_axis - 1);
  }
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= g.axes_[a].size();
  g.node_of_cellpoint_.assign(total, -1);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    Vec p(d);
    for (int a = d - 1; a >= 0; --a) {
      p[a] = g.axes_[a][rest % g.axes_[a].size()];
      rest /= g.axes_[a].size();
    }
    if (domain.contains(p) != Classification::Exterior) {
      g.node_of_cellpoint_[flat] = static_cast<int>(g.nodes_.size());
      g.nodes_.push_back(std::move(p));
    }
  }
  if (g.nodes_.empty()) throw Error(Errc::InvalidPoint, "no grid node lies in the closure");
  return g;
}

double SpatialGrid::spacing() const {
  double h = 0.0;
  for (const auto& ax : axes_)
    for (std::size_t i = 1; i < ax.size(); ++i) h = std::max(h, ax[i] - ax[i - 1]);
  return h;
}

int SpatialGrid::node_id(const std::vector<std::size_t>& multi) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) flat = flat * axes_[a].size() + multi[a];
  return node_of_cellpoint_[flat];
}

FlowFamily flow_solve(const Domain& domain, const CoefficientField& field,
                      const BrownianPath& path, const SpatialGrid& grid, int workers) {
  FlowFamily family;
  family.grid = grid;
  family.solutions.resize(grid.nodes().size());
  parallel_for(grid.nodes().size(), workers, [&](std::size_t i) {
    family.solutions[i] = solve(domain, field, path, grid.nodes()[i]);
  });
  return family;
}

namespace {

std::size_t nearest_node(const SpatialGrid& grid, const Vec& z) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.nodes().size(); ++i) {
    const double d = norm(grid.nodes()[i] - z);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

SubstituteResult substitute(const FlowFamily& family, const Vec& z, double t) {
  const auto& axes = family.grid.axes();
  const auto d = axes.size();
  std::vector<std::size_t> cell(d);
  std::vector<double> w(d);
  for (std::size_t a = 0; a < d; ++a) {
    const auto& ax = axes[a];
    if (z[a] < ax.front() || z[a] > ax.back())
      throw Error(Errc::OutOfHull, "substitution point outside the grid hull");
    auto it = std::upper_bound(ax.begin(), ax.end(), z[a]);
    std::size_t i = (it == ax.begin()) ? 0 : static_cast<std::size_t>(it - ax.begin()) - 1;
    if (i + 1 >= ax.size()) i = ax.size() - 2;
    cell[a] = i;
    w[a] = (z[a] - ax[i]) / (ax[i + 1] - ax[i]);
  }

  // all 2^d corner nodes must lie in the closure for multilinear weights
  std::vector<int> corner_ids(std::size_t{1} << d);
  bool full_cell = true;
  std::vector<std::size_t> multi(d);
  for (std::size_t c = 0; c < corner_ids.size(); ++c) {
    for (std::size_t a = 0; a < d; ++a) multi[a] = cell[a] + ((c >> a) & 1u);
    corner_ids[c] = family.grid.node_id(multi);
    if (corner_ids[c] < 0) full_cell = false;
  }

  SubstituteResult out;
  if (!full_cell) {
    out.nearest_node = true;
    out.x = family.solutions[nearest_node(family.grid, z)].x_at(t);
    return out;
  }
  Vec acc(z.size());
  for (std::size_t c = 0; c < corner_ids.size(); ++c) {
    double weight = 1.0;
    for (std::size_t a = 0; a < d; ++a) weight *= ((c >> a) & 1u) ? w[a] : 1.0 - w[a];
    if (weight == 0.0) continue;
    axpy(weight, family.solutions[static_cast<std::size_t>(corner_ids[c])].x_at(t), acc);
  }
  out.x = std::move(acc);
  return out;
}

SubstitutionError substitution_error(const Domain& domain, const CoefficientField& field,
                                     const BrownianPath& path, const AnticipatingInitial& init,
                                     double t, const SpatialGrid& grid, int workers) {
  SubstitutionError result;
  result.z = draw_initial(init, path, domain);
  const FlowFamily family = flow_solve(domain, field, path, grid, workers);
  const SubstituteResult sub = substitute(family, result.z, t);
  const ReflectedSolution direct = solve(domain, field, path, result.z);
  result.err = norm(sub.x - direct.x_at(t));
  result.nearest_node = sub.nearest_node;
  return result;
}

double BumpFunction::operator()(const Vec& x) const {
  const Vec d = x - center;
  const double r2 = dot(d, d) / (radius * radius);
  if (r2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r2));
}

LocalTimeFunctionals local_time_functionals(const ReflectedSolution& solution,
                                            const Domain& domain, const BumpFunction& f,
                                            double support_margin) {
  if (domain.interior_distance_bound(f.center) < f.radius + support_margin)
    throw Error(Errc::SupportViolation,
                "test function support reaches into the boundary band");
  LocalTimeFunctionals out;
  const std::size_t n = solution.dl.size();
  out.f_integral.reserve(n + 1);
  out.g_integral.reserve(n + 1);
  out.f_integral.push_back(0.0);
  out.g_integral.emplace_back(solution.x[0].size());
  for (std::size_t k = 0; k < n; ++k) {
    // mass |dl_k| sits at the arrival point; xi d|L| telescopes to dl itself
    out.f_integral.push_back(out.f_integral.back() +
                             f(solution.x[k + 1]) * norm(solution.dl[k]));
    out.g_integral.push_back(out.g_integral.back() + solution.dl[k]);
  }
  return out;
}

}  // namespace sdeflow
