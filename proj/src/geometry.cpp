#include "sdeflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdeflow/errors.hpp"

namespace sdeflow {

namespace {

void check_finite(const Vec& x) {
  if (!all_finite(x)) throw Error(Errc::InvalidPoint, "point has non-finite coordinates");
}

void check_dim(const Vec& x, int d) {
  if (static_cast<int>(x.size()) != d)
    throw Error(Errc::InvalidPoint, "point dimension mismatch");
}

}  // namespace

Domain Domain::unit_ball(int dim, double alpha) {
  Domain d;
  d.kind_ = DomainKind::UnitBall;
  d.dim_ = dim;
  d.alpha_ = alpha;
  return d;
}

Domain Domain::ellipsoid(Vec semi_axes, double alpha) {
  Domain d;
  d.kind_ = DomainKind::Ellipsoid;
  d.dim_ = static_cast<int>(semi_axes.size());
  d.alpha_ = alpha;
  d.semi_axes_ = std::move(semi_axes);
  for (double a : d.semi_axes_)
    if (!(a > 0.0)) throw Error(Errc::InvalidPoint, "ellipsoid semi-axes must be positive");
  return d;
}

Domain Domain::interval(double lo, double hi, double alpha) {
  if (!(lo < hi)) throw Error(Errc::InvalidPoint, "interval requires lo < hi");
  Domain d;
  d.kind_ = DomainKind::Interval1D;
  d.dim_ = 1;
  d.alpha_ = alpha;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

double Domain::phi(const Vec& x) const {
  check_dim(x, dim_);
  switch (kind_) {
    case DomainKind::UnitBall:
      return dot(x, x) - 1.0;
    case DomainKind::Ellipsoid: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += (x[i] / semi_axes_[i]) * (x[i] / semi_axes_[i]);
      return s - 1.0;
    }
    case DomainKind::Interval1D: {
      // normalized so |grad phi| = 1 at the endpoints (phi ~ signed distance
      // near the boundary; keeps the penalty force scale interval-independent)
      const double c = 0.5 * (lo_ + hi_);
      const double r = 0.5 * (hi_ - lo_);
      return ((x[0] - c) * (x[0] - c) - r * r) / (hi_ - lo_);
    }
  }
  return 0.0;
}

Vec Domain::grad_phi(const Vec& x) const {
  check_dim(x, dim_);
  Vec g(x.size());
  switch (kind_) {
    case DomainKind::UnitBall:
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
      break;
    case DomainKind::Ellipsoid:
      for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = 2.0 * x[i] / (semi_axes_[i] * semi_axes_[i]);
      break;
    case DomainKind::Interval1D:
      g[0] = 2.0 * (x[0] - 0.5 * (lo_ + hi_)) / (hi_ - lo_);
      break;
  }
  return g;
}

Classification Domain::contains(const Vec& x) const {
  check_finite(x);
  const double p = phi(x);
  if (std::abs(p) <= tol_boundary_) return Classification::Boundary;
  return p < 0.0 ? Classification::Interior : Classification::Exterior;
}

ProjectResult Domain::project(const Vec& y) const {
  check_finite(y);
  check_dim(y, dim_);
  ProjectResult r;
  if (phi(y) <= 0.0) {
    r.x = y;
    r.residual = Vec(y.size());
    return r;
  }
  switch (kind_) {
    case DomainKind::UnitBall: {
      const double n = norm(y);
      r.x = (1.0 / n) * y;
      break;
    }
    case DomainKind::Interval1D: {
      r.x = Vec{std::clamp(y[0], lo_, hi_)};
      break;
    }
    case DomainKind::Ellipsoid: {
      // KKT: x_i = a_i^2 y_i / (a_i^2 + lam); solve g(lam) = phi(x(lam)) = 0
      // over lam > 0. g is strictly decreasing, g(0) > 0 for exterior y.
      auto g = [&](double lam, double& deriv) {
        double s = 0.0, ds = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double a2 = semi_axes_[i] * semi_axes_[i];
          const double w = semi_axes_[i] * y[i] / (a2 + lam);
          s += w * w;
          ds += -2.0 * w * w / (a2 + lam);
        }
        deriv = ds;
        return s - 1.0;
      };
      double lo = 0.0, hi = norm(y) * *std::max_element(semi_axes_.begin(), semi_axes_.end());
      double deriv = 0.0;
      while (g(hi, deriv) > 0.0) hi *= 2.0;
      double lam = 0.5 * (lo + hi);
      bool converged = false;
      int iter = 0;
      for (; iter < 100; ++iter) {
        const double val = g(lam, deriv);
        if (val > 0.0)
          lo = lam;
        else
          hi = lam;
        if (std::abs(val) < 1e-15) {
          converged = true;
          break;
        }
        double next = lam - val / deriv;  // Newton, damped to the bracket
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - lam) <= 1e-12 * (1.0 + lam)) {
          lam = next;
          converged = true;
          break;
        }
        lam = next;
      }
      if (!converged)
        throw Error(Errc::ProjectionDiverged,
                    "ellipsoid projection did not converge after " + std::to_string(iter) +
                        " iterations");
      Vec x(y.size());
      for (int i = 0; i < dim_; ++i) {
        const double a2 = semi_axes_[i] * semi_axes_[i];
        x[i] = a2 * y[i] / (a2 + lam);
      }
      r.x = std::move(x);
      break;
    }
  }
  r.residual = y - r.x;
  return r;
}

Vec Domain::outward_normal(const Vec& x) const {
  if (contains(x) != Classification::Boundary)
    throw Error(Errc::NotOnBoundary, "outward_normal requires a boundary point");
  Vec g = grad_phi(x);
  const double n = norm(g);
  return (1.0 / n) * g;
}

double Domain::interior_distance_bound(const Vec& x) const {
  switch (kind_) {
    case DomainKind::UnitBall:
      return std::max(0.0, 1.0 - norm(x));
    case DomainKind::Interval1D:
      return std::max(0.0, std::min(x[0] - lo_, hi_ - x[0]));
    case DomainKind::Ellipsoid: {
      // |phi| / sup|grad phi| is a valid lower bound on the distance
      const double grad_bound = 2.0 / *std::min_element(semi_axes_.begin(), semi_axes_.end());
      return std::max(0.0, -phi(x)) / grad_bound;
    }
  }
  return 0.0;
}

double Domain::diameter() const {
  switch (kind_) {
    case DomainKind::UnitBall:
      return 2.0;
    case DomainKind::Ellipsoid:
      return 2.0 * *std::max_element(semi_axes_.begin(), semi_axes_.end());
    case DomainKind::Interval1D:
      return hi_ - lo_;
  }
  return 0.0;
}

std::pair<Vec, Vec> Domain::bounding_box() const {
  Vec lo(dim_), hi(dim_);
  switch (kind_) {
    case DomainKind::UnitBall:
      for (int i = 0; i < dim_; ++i) {
        lo[i] = -1.0;
        hi[i] = 1.0;
      }
      break;
    case DomainKind::Ellipsoid:
      for (int i = 0; i < dim_; ++i) {
        lo[i] = -semi_axes_[i];
        hi[i] = semi_axes_[i];
      }
      break;
    case DomainKind::Interval1D:
      lo[0] = lo_;
      hi[0] = hi_;
      break;
  }
  return {lo, hi};
}

}  // namespace sdeflow
