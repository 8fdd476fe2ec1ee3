#pragma once

// Smooth bounded domains with the boundary data a reflected SDE needs: a C^2
// level function phi (negative inside, zero on the boundary, positive
// outside), unit outward normals derived as grad phi / |grad phi|, and a
// closest-point projection onto the closure. The catalog is closed: unit
// ball, axis-aligned ellipsoid, and a 1-d interval (kept as host for the
// exact one-sided reflection oracle). All kinds are convex, so the supporting
// normal inequality holds with curvature constant c0 = 0.

#include <utility>

#include "sdeflow/linalg.hpp"

namespace sdeflow {

enum class DomainKind { UnitBall, Ellipsoid, Interval1D };

enum class Classification { Interior, Boundary, Exterior };

struct ProjectResult {
  Vec x;         // closest point of the closure
  Vec residual;  // y - x; zero when y already lies in the closure
};

class Domain {
 public:
  static Domain unit_ball(int dim, double alpha = 1.0);
  static Domain ellipsoid(Vec semi_axes, double alpha = 1.0);
  static Domain interval(double lo, double hi, double alpha = 1.0);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double c0() const { return 0.0; }
  double tol_boundary() const { return tol_boundary_; }
  void set_tol_boundary(double tol) { tol_boundary_ = tol; }

  double phi(const Vec& x) const;
  Vec grad_phi(const Vec& x) const;

  Classification contains(const Vec& x) const;

  // Closest point of the closure; Newton/bisection on the KKT multiplier for
  // ellipsoids (throws ProjectionDiverged on failure).
  ProjectResult project(const Vec& y) const;

  // Unit outward normal at a boundary point (throws NotOnBoundary when x is
  // not within tol_boundary of the boundary).
  Vec outward_normal(const Vec& x) const;

  double diameter() const;
  std::pair<Vec, Vec> bounding_box() const;

  // Conservative lower bound on dist(x, boundary) for x in the closure:
  // max(0, -phi(x)) divided by a bound on |grad phi| over the closure.
  double interior_distance_bound(const Vec& x) const;
  const Vec& semi_axes() const { return semi_axes_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  Domain() = default;

  DomainKind kind_ = DomainKind::UnitBall;
  int dim_ = 1;
  double alpha_ = 1.0;
  double tol_boundary_ = 1e-9;
  Vec semi_axes_;              // ellipsoid
  double lo_ = 0.0, hi_ = 0.0; // interval
};

}  // namespace sdeflow
