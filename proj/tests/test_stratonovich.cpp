#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sdeflow/errors.hpp"
#include "sdeflow/rng.hpp"
#include "sdeflow/stratonovich.hpp"

using namespace sdeflow;

namespace {

CoefficientField constant_field(double a, double b, double c, double d) {
  Mat m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return CoefficientField::constant(m, Drift::zero());
}

}  // namespace

TEST_CASE("riemann sum is exact for constant sigma") {
  auto field = constant_field(0.4, -0.1, 0.2, 0.6);
  const Mat m = field.sigma(Vec{0.0, 0.0});
  auto fine = Partition::dyadic(9);
  auto path = BrownianPath::sample(31, fine, 2);
  auto sol = solve(Domain::unit_ball(2), field, path, Vec{0.0, 0.0});

  for (int level : {2, 3, 5, 7}) {
    auto part = Partition::dyadic(level);
    for (double t : {0.5, 1.0}) {
      const Vec got = riemann_sum(sol, field, path, part, t);
      CHECK(norm(got - m.mul(path.value_at(t))) < 1e-12);
    }
  }
  // a ragged partition nested in the fine grid
  Partition ragged({0.0, 1.0 / 512.0, 0.25, 0.375, 0.8125, 1.0});
  const Vec got = riemann_sum(sol, field, path, ragged, 1.0);
  CHECK(norm(got - m.mul(path.value_at(1.0))) < 1e-12);

  CHECK(norm(riemann_sum(sol, field, path, Partition::dyadic(3), 0.0)) == 0.0);
}

TEST_CASE("riemann sum rejects bad partitions") {
  auto field = constant_field(1.0, 0.0, 0.0, 1.0);
  auto path = BrownianPath::sample(3, Partition::dyadic(4), 2);
  auto sol = solve(Domain::unit_ball(2), field, path, Vec{0.0, 0.0});
  CHECK_THROWS_AS(riemann_sum(sol, field, path, Partition({0.0, 0.3, 1.0}), 1.0), Error);
  CHECK_THROWS_AS(riemann_sum(sol, field, path, Partition::dyadic(2), 0.7), Error);
}

TEST_CASE("riemann sum is linear in sigma") {
  auto f1 = CoefficientField::trigonometric(2, 0.5, 1.0, 2.0, Drift::zero());
  auto f2 = CoefficientField::diagonal_affine(Vec{0.1, 0.2}, Vec{0.3, -0.2}, Drift::zero());
  auto fsum = CoefficientField::custom(
      2,
      [&](const Vec& x) {
        Mat m = f1.sigma(x);
        m += f2.sigma(x);
        return m;
      },
      [&](const Vec& x) { return f1.grad_sigma(x); }, nullptr, Drift::zero());
  auto fine = Partition::dyadic(8);
  auto path = BrownianPath::sample(57, fine, 2);
  auto sol = solve(Domain::unit_ball(2), f1, path, Vec{0.1, -0.2});
  auto part = Partition::dyadic(4);
  const Vec sum_of = riemann_sum(sol, f1, path, part, 1.0) + riemann_sum(sol, f2, path, part, 1.0);
  const Vec of_sum = riemann_sum(sol, fsum, path, part, 1.0);
  CHECK(norm(sum_of - of_sum) < 1e-12);
}

TEST_CASE("reference integral") {
  SUBCASE("constant sigma has no correction") {
    auto field = constant_field(0.7, 0.0, 0.1, 0.3);
    auto path = BrownianPath::sample(5, Partition::dyadic(8), 2);
    auto sol = solve(Domain::unit_ball(2), field, path, Vec{0.0, 0.0});
    const Mat m = field.sigma(Vec{0.0, 0.0});
    CHECK(norm(reference_integral(sol, field, path, 1.0) - m.mul(path.value_at(1.0))) < 1e-12);
  }
  SUBCASE("zero sigma gives zero") {
    auto field = CoefficientField::constant(Mat(2, 2), Drift::zero());
    auto path = BrownianPath::sample(5, Partition::dyadic(6), 2);
    auto sol = solve(Domain::unit_ball(2), field, path, Vec{0.0, 0.0});
    CHECK(norm(reference_integral(sol, field, path, 1.0)) == 0.0);
  }
  SUBCASE("sine correction is positive while X stays in (0, pi/2)") {
    // sigma(x) = sin x on an interval inside (0, pi/2)
    auto field = CoefficientField::trigonometric(1, 1.0, 1.0, 0.0, Drift::zero());
    Domain dom = Domain::interval(0.2, 1.3);
    auto path = BrownianPath::sample(11, Partition::dyadic(9), 1);
    auto sol = solve(dom, field, path, Vec{0.7});
    const Vec i_full = reference_integral(sol, field, path, 1.0);
    Vec ito_only(1);
    const auto& ts = sol.grid.times();
    for (std::size_t k = 0; k + 1 < ts.size(); ++k)
      field.sigma(sol.x[k]).mul_acc(path.increment(ts[k], ts[k + 1]), ito_only);
    CHECK(i_full[0] - ito_only[0] > 0.0);
  }
}

TEST_CASE("nested partition gaps shrink toward the reference (pinned seed)") {
  // sigma(x) = x in d = 1; |S_{level+1} - S_level| stays below |S_level - I|
  auto field = CoefficientField::diagonal_affine(Vec{0.0}, Vec{1.0}, Drift::zero());
  Domain dom = Domain::interval(-1.0, 1.0);
  auto fine = Partition::dyadic(9);
  auto path = BrownianPath::sample(2718, fine, 1);
  auto sol = solve(dom, field, path, Vec{0.3});
  const Vec i_ref = reference_integral(sol, field, path, 1.0);
  const auto samples = sigma_samples(sol, field);
  std::vector<double> s;
  for (int level = 3; level <= 7; ++level)
    s.push_back(riemann_sum(samples, sol, path, Partition::dyadic(level), 1.0)[0]);
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    CHECK(std::abs(s[i + 1] - s[i]) < std::abs(s[i] - i_ref[0]));
}

TEST_CASE("convergence study") {
  SUBCASE("constant sigma is zero up to summation-order noise") {
    auto field = constant_field(0.5, 0.0, 0.0, 0.5);
    auto study = convergence_study(Domain::unit_ball(2), field, {Vec{0.0, 0.0}, Vec{0.3, 0.1}},
                                   2.0, DyadicRange{3, 5}, 7, 30, 99);
    CHECK(study.sup_over_x0.exact_zero);
    for (const auto& est : study.per_x0) {
      CHECK(est.exact_zero);
      for (double m : est.moments) CHECK(m <= std::pow(1e-12, 4.0));
      CHECK_FALSE(est.fitted_rate.has_value());
    }
  }
  SUBCASE("sup dominates every per-x0 moment and moments decrease (pinned seed)") {
    auto field = CoefficientField::trigonometric(1, 1.0, 1.0, 0.0, Drift::zero());
    Domain dom = Domain::interval(-1.0, 1.0);
    auto study = convergence_study(dom, field, {Vec{-0.5}, Vec{0.0}, Vec{0.5}}, 2.0,
                                   DyadicRange{4, 7}, 9, 200, 4242);
    for (std::size_t li = 0; li < study.meshes.size(); ++li)
      for (const auto& est : study.per_x0)
        CHECK(study.sup_over_x0.moments[li] >= est.moments[li]);
    for (std::size_t li = 0; li + 1 < study.meshes.size(); ++li)
      CHECK(study.sup_over_x0.moments[li] > study.sup_over_x0.moments[li + 1]);
    REQUIRE(study.sup_over_x0.fitted_rate.has_value());
    CHECK(study.sup_over_x0.fitted_rate->slope > 0.0);
  }
  SUBCASE("too few replicas") {
    auto field = constant_field(1.0, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(convergence_study(Domain::unit_ball(2), field, {Vec{0.0, 0.0}}, 2.0,
                                      DyadicRange{3, 4}, 6, 10, 1),
                    Error);
  }
}

TEST_CASE("bundled result carries the exact difference norm") {
  auto field = CoefficientField::trigonometric(1, 1.0, 1.0, 0.0, Drift::zero());
  Domain dom = Domain::interval(-1.0, 1.0);
  auto path = BrownianPath::sample(8, Partition::dyadic(8), 1);
  auto sol = solve(dom, field, path, Vec{0.2});
  auto r = riemann_vs_reference(sol, field, path, Partition::dyadic(4), 1.0);
  CHECK(r.t == 1.0);
  CHECK(r.diff_norm == norm(r.s_pi - r.i_ref));
  CHECK(r.diff_norm > 0.0);
}

TEST_CASE("two point gap") {
  auto field = CoefficientField::trigonometric(2, 0.5, 1.0, 2.0, Drift::linear(-0.5));
  Domain ball = Domain::unit_ball(2);
  auto part = Partition::dyadic(5);

  SUBCASE("coincident points give zero") {
    CHECK(two_point_gap(ball, field, Vec{0.1, 0.2}, Vec{0.1, 0.2}, part, 8, 2.0, 40, 7) == 0.0);
  }
  SUBCASE("gap is symmetric in the endpoints") {
    const double ab = two_point_gap(ball, field, Vec{-0.2, 0.0}, Vec{0.2, 0.0}, part, 8, 2.0, 40, 7);
    const double ba = two_point_gap(ball, field, Vec{0.2, 0.0}, Vec{-0.2, 0.0}, part, 8, 2.0, 40, 7);
    CHECK(ab == ba);
    CHECK(ab > 0.0);
  }
  SUBCASE("endpoints outside the closure are rejected") {
    CHECK_THROWS_AS(two_point_gap(ball, field, Vec{1.4, 0.0}, Vec{0.0, 0.0}, part, 8, 2.0, 40, 7),
                    Error);
  }
}
