#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sdeflow/anticipating.hpp"
#include "sdeflow/errors.hpp"
#include "sdeflow/rng.hpp"
#include "sdeflow/stratonovich.hpp"

using namespace sdeflow;

namespace {

CoefficientField frozen(int d) { return CoefficientField::constant(Mat(d, d), Drift::zero()); }

CoefficientField canonical_field() {
  return CoefficientField::trigonometric(2, 0.5, 1.0, 2.0, Drift::linear(-0.5));
}

}  // namespace

TEST_CASE("draw_initial") {
  Domain ball = Domain::unit_ball(2);
  auto path = BrownianPath::sample(1, Partition::dyadic(4), 2);

  SUBCASE("fixed point ignores the path") {
    CHECK(draw_initial(AnticipatingInitial::fixed(Vec{0.3, -0.1}), path, ball) == Vec{0.3, -0.1});
  }
  SUBCASE("projected endpoint keeps interior endpoints") {
    Partition grid({0.0, 1.0});
    auto p = BrownianPath::from_values(grid, {Vec{0.0, 0.0}, Vec{0.4, 0.1}});
    CHECK(draw_initial(AnticipatingInitial::projected_endpoint(), p, ball) == Vec{0.4, 0.1});
  }
  SUBCASE("projected endpoint projects exterior endpoints radially") {
    Partition grid({0.0, 1.0});
    auto p = BrownianPath::from_values(grid, {Vec{0.0, 0.0}, Vec{2.0, 0.0}});
    CHECK(norm(draw_initial(AnticipatingInitial::projected_endpoint(), p, ball) - Vec{1.0, 0.0}) <
          1e-15);
  }
  SUBCASE("every kind lands in the closure") {
    for (auto kind : {AnticipatingInitial::projected_endpoint(),
                      AnticipatingInitial::projected_mean(),
                      AnticipatingInitial::projected_max()}) {
      for (std::uint64_t s = 0; s < 50; ++s) {
        auto p = BrownianPath::sample(split_seed(9, s), Partition::dyadic(5), 2);
        CHECK(ball.contains(draw_initial(kind, p, ball)) != Classification::Exterior);
      }
    }
  }
  SUBCASE("paths not covering [0,1] are rejected") {
    auto p = BrownianPath::sample(1, Partition::dyadic(4, 0.5), 2);
    CHECK_THROWS_AS(draw_initial(AnticipatingInitial::projected_endpoint(), p, ball), Error);
  }
}

TEST_CASE("spatial grid keeps only closure nodes") {
  Domain ball = Domain::unit_ball(2);
  auto grid = SpatialGrid::inscribed(ball, 5);
  CHECK(grid.nodes().size() == 13);  // 5x5 lattice on [-1,1]^2 clipped to the disk
  for (const Vec& n : grid.nodes()) CHECK(ball.contains(n) != Classification::Exterior);
  CHECK(grid.spacing() == doctest::Approx(0.5));
}

TEST_CASE("flow solve") {
  Domain ball = Domain::unit_ball(2);
  auto path = BrownianPath::sample(3, Partition::dyadic(5), 2);
  auto grid = SpatialGrid::inscribed(ball, 3);

  SUBCASE("frozen dynamics keeps each node in place") {
    auto family = flow_solve(ball, frozen(2), path, grid);
    for (std::size_t i = 0; i < grid.nodes().size(); ++i)
      for (const Vec& xk : family.solutions[i].x) CHECK(xk == grid.nodes()[i]);
  }
  SUBCASE("grid point substitution reproduces the node solution") {
    auto family = flow_solve(ball, canonical_field(), path, grid);
    for (std::size_t i = 0; i < grid.nodes().size(); ++i) {
      auto r = substitute(family, grid.nodes()[i], 1.0);
      CHECK(norm(r.x - family.solutions[i].x_at(1.0)) == 0.0);
    }
  }
}

TEST_CASE("substitute") {
  Domain ball = Domain::unit_ball(2);
  auto path = BrownianPath::sample(17, Partition::dyadic(6), 2);
  auto grid = SpatialGrid::inscribed(ball, 5);

  SUBCASE("frozen dynamics interpolates the identity") {
    auto family = flow_solve(ball, frozen(2), path, grid);
    for (const Vec& z : {Vec{0.1, 0.2}, Vec{-0.3, 0.05}, Vec{0.25, -0.25}}) {
      auto r = substitute(family, z, 0.5);
      CHECK_FALSE(r.nearest_node);
      CHECK(norm(r.x - z) < 1e-12);
    }
  }
  SUBCASE("near-boundary points fall back to the nearest node") {
    auto family = flow_solve(ball, frozen(2), path, grid);
    auto r = substitute(family, Vec{0.9, 0.3}, 0.5);  // cell corners leave the disk
    CHECK(r.nearest_node);
  }
  SUBCASE("points outside the hull are rejected") {
    auto family = flow_solve(ball, frozen(2), path, grid);
    CHECK_THROWS_AS(substitute(family, Vec{1.5, 0.0}, 0.5), Error);
  }
}

TEST_CASE("substitution is exact for an affine flow") {
  // d = 1, constant sigma, linear drift, interior-only: X_t(x) is affine in x,
  // so multilinear interpolation agrees with the direct solve
  Domain dom = Domain::interval(-5.0, 5.0);
  auto field = CoefficientField::constant(0.3 * Mat::identity(1), Drift::linear(-0.5));
  auto path = BrownianPath::sample(23, Partition::dyadic(7), 1);
  auto grid = SpatialGrid::inscribed(dom, 5);
  auto family = flow_solve(dom, field, path, grid);
  const ReflectedSolution direct = solve(dom, field, path, Vec{0.37});
  for (double t : {0.25, 0.5, 1.0}) {
    auto r = substitute(family, Vec{0.37}, t);
    CHECK_FALSE(r.nearest_node);
    CHECK(norm(r.x - direct.x_at(t)) < 1e-12);
  }
  for (std::size_t k = 0; k + 1 < direct.x.size(); ++k) CHECK(direct.boundary_flags[k] == 0);
}

TEST_CASE("substitution error") {
  Domain ball = Domain::unit_ball(2);
  auto grid = SpatialGrid::inscribed(ball, 5);

  SUBCASE("node-snapped fixed initial gives zero") {
    auto path = BrownianPath::sample(29, Partition::dyadic(7), 2);
    auto init = AnticipatingInitial::fixed(grid.nodes()[4]);
    auto res = substitution_error(ball, canonical_field(), path, init, 1.0, grid);
    CHECK(res.err < 1e-12);
  }
  SUBCASE("frozen dynamics is exact wherever interpolation applies") {
    // with X_t(x) = x the interpolated value reproduces z; the nearest-node
    // fallback (near-boundary z, flagged) is off by exactly |z - node|
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto path = BrownianPath::sample(split_seed(31, s), Partition::dyadic(6), 2);
      for (auto kind : {AnticipatingInitial::projected_endpoint(),
                        AnticipatingInitial::projected_mean(),
                        AnticipatingInitial::projected_max()}) {
        auto res = substitution_error(ball, frozen(2), path, kind, 1.0, grid);
        if (!res.nearest_node) {
          CHECK(res.err < 1e-12);
        } else {
          double nearest = 1e300;
          for (const Vec& n : grid.nodes()) nearest = std::min(nearest, norm(n - res.z));
          CHECK(res.err == doctest::Approx(nearest).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("Riemann-sum substitution identity for a node-snapped initial") {
  // S_pi(t, x)|_{x=Z} via the flow's node solution equals S_pi(t, Z) from the
  // direct solve when Z lies on a grid node (identical computations)
  Domain ball = Domain::unit_ball(2);
  auto field = canonical_field();
  auto path = BrownianPath::sample(59, Partition::dyadic(8), 2);
  auto grid = SpatialGrid::inscribed(ball, 5);
  auto family = flow_solve(ball, field, path, grid);
  auto part = Partition::dyadic(4);
  for (std::size_t i = 0; i < grid.nodes().size(); i += 3) {
    const Vec z = grid.nodes()[i];
    const Vec flow_side = riemann_sum(family.solutions[i], field, path, part, 1.0);
    const ReflectedSolution direct = solve(ball, field, path, z);
    const Vec direct_side = riemann_sum(direct, field, path, part, 1.0);
    CHECK(flow_side == direct_side);
  }
}

TEST_CASE("local time functionals") {
  Domain ball = Domain::unit_ball(2);
  auto field = canonical_field();
  auto path = BrownianPath::sample(37, Partition::dyadic(9), 2);
  auto sol = solve(ball, field, path, Vec{0.95, 0.0});
  REQUIRE(sol.l_tv.back() > 0.0);  // boundary must have been hit

  SUBCASE("interior-supported bump collects no local-time mass") {
    const BumpFunction f{Vec{0.0, 0.0}, 0.3};
    auto lt = local_time_functionals(sol, ball, f, 0.2);
    for (double v : lt.f_integral) CHECK(v == 0.0);
  }
  SUBCASE("G reconstruction equals the stored L bitwise") {
    const BumpFunction f{Vec{0.0, 0.0}, 0.3};
    auto lt = local_time_functionals(sol, ball, f, 0.2);
    REQUIRE(lt.g_integral.size() == sol.l.size());
    for (std::size_t k = 0; k < sol.l.size(); ++k) CHECK(lt.g_integral[k] == sol.l[k]);
  }
  SUBCASE("support reaching the boundary band is rejected") {
    const BumpFunction f{Vec{0.5, 0.0}, 0.4};
    CHECK_THROWS_AS(local_time_functionals(sol, ball, f, 0.2), Error);
  }
  SUBCASE("bump vanishes outside its support ball") {
    const BumpFunction f{Vec{0.0, 0.0}, 0.5};
    CHECK(f(Vec{0.6, 0.0}) == 0.0);
    CHECK(f(Vec{0.5, 0.0}) == 0.0);
    CHECK(f(Vec{0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(f(Vec{0.2, 0.1}) > 0.0);
  }
}

TEST_CASE("adjacent-node local time gaps shrink with the grid (pinned seed)") {
  // continuity surrogate: max over adjacent nodes of sup_t |G(t,x) - G(t,x')|
  // decreases when the node spacing halves
  Domain dom = Domain::interval(-1.0, 1.0);
  auto field = CoefficientField::trigonometric(1, 1.0, 1.0, 1.5, Drift::zero());
  auto path = BrownianPath::sample(4711, Partition::dyadic(9), 1);
  auto gap = [&](int per_axis) {
    auto family = flow_solve(dom, field, path, SpatialGrid::inscribed(dom, per_axis));
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < family.grid.nodes().size(); ++i) {
      double sup = 0.0;
      const auto& a = family.solutions[i];
      const auto& b = family.solutions[i + 1];
      for (std::size_t k = 0; k < a.l.size(); ++k) sup = std::max(sup, norm(a.l[k] - b.l[k]));
      worst = std::max(worst, sup);
    }
    return worst;
  };
  const double coarse = gap(5);
  const double fine = gap(9);
  CHECK(fine < coarse);
  CHECK(coarse > 0.0);
}
