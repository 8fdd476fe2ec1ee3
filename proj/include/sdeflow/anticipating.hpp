#pragma once

// Anticipating initial conditions (functionals of the whole Brownian path,
// projected into the closure), the flow-and-substitute construction that
// evaluates the family X_t(x) at x = Z, and the local-time functionals
// F(t) = int f(X) d|L| and G(t) = int xi(X) d|L|.

#include <cstdint>
#include <vector>

#include "sdeflow/coefficients.hpp"
#include "sdeflow/geometry.hpp"
#include "sdeflow/paths.hpp"
#include "sdeflow/solver.hpp"

namespace sdeflow {

enum class InitialKind { FixedPoint, ProjectedEndpoint, ProjectedMean, ProjectedMax };

struct AnticipatingInitial {
  InitialKind kind = InitialKind::FixedPoint;
  Vec fixed_point;  // FixedPoint only

  static AnticipatingInitial fixed(Vec x) { return {InitialKind::FixedPoint, std::move(x)}; }
  static AnticipatingInitial projected_endpoint() { return {InitialKind::ProjectedEndpoint, {}}; }
  static AnticipatingInitial projected_mean() { return {InitialKind::ProjectedMean, {}}; }
  static AnticipatingInitial projected_max() { return {InitialKind::ProjectedMax, {}}; }
};

// A deterministic functional of the full path, projected into the closure
// (so it lies in the closed domain with probability one). The path must
// cover [0, 1].
Vec draw_initial(const AnticipatingInitial& init, const BrownianPath& path, const Domain& domain);

// Axis-aligned product grid over the domain's bounding box, keeping the nodes
// that lie in the closure. Cells whose 2^d corners all survive support
// multilinear interpolation (convexity makes such cells subsets of the
// closure); elsewhere substitution falls back to the nearest node.
class SpatialGrid {
 public:
  static SpatialGrid inscribed(const Domain& domain, int per_axis);

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<Vec>& nodes() const { return nodes_; }
  double spacing() const;  // max axis step

  // flat product index -> index into nodes(), or -1 when outside the closure
  int node_id(const std::vector<std::size_t>& multi) const;

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<Vec> nodes_;
  std::vector<int> node_of_cellpoint_;
};

struct FlowFamily {
  SpatialGrid grid;
  std::vector<ReflectedSolution> solutions;  // one per grid node, common path
};

// One solve per grid node on the identical path.
FlowFamily flow_solve(const Domain& domain, const CoefficientField& field,
                      const BrownianPath& path, const SpatialGrid& grid, int workers = 1);

struct SubstituteResult {
  Vec x;
  bool nearest_node = false;  // fell back to the nearest grid node
};

// X_t(x) interpolated at x = z: multilinear over the enclosing grid cell when
// all its corners lie in the closure, nearest-node otherwise. OutOfHull when
// z leaves the grid's bounding box. t must be a solver grid time.
SubstituteResult substitute(const FlowFamily& family, const Vec& z, double t);

struct SubstitutionError {
  double err = 0.0;
  bool nearest_node = false;
  Vec z;
};

// | X_t(x)|_{x=Z} - X_t(Z) | on one path: flow substitution at Z versus the
// direct solve started from Z.
SubstitutionError substitution_error(const Domain& domain, const CoefficientField& field,
                                     const BrownianPath& path, const AnticipatingInitial& init,
                                     double t, const SpatialGrid& grid, int workers = 1);

// Smooth bump supported on |x - center| < radius.
struct BumpFunction {
  Vec center;
  double radius = 1.0;

  double operator()(const Vec& x) const;
};

struct LocalTimeFunctionals {
  std::vector<double> f_integral;  // per grid time: sum f(X) d|L|
  std::vector<Vec> g_integral;     // per grid time: sum xi(X) d|L| (= L)
};

// F and G along a solution. The bump's support must keep at least
// `support_margin` distance from the boundary (SupportViolation otherwise).
LocalTimeFunctionals local_time_functionals(const ReflectedSolution& solution,
                                            const Domain& domain, const BumpFunction& f,
                                            double support_margin);

}  // namespace sdeflow
