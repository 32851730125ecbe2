#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mcx/catalog.hpp"
#include "mcx/hyperbolicity.hpp"

using namespace mcx;

namespace {

// Cayley-Klein distance on the unit ball: (1/2) log of the cross-ratio with
// the endpoints of the chord through x and y.
double klein_distance(const Vec& x, const Vec& y) {
  const Vec d = (y - x).normalized();
  // |x + s d| = 1: s^2 + 2 (x.d) s + |x|^2 - 1 = 0.
  const double b = x.dot(d), c = x.norm2() - 1.0;
  const double disc = std::sqrt(b * b - c);
  const Vec a = x + (-b - disc) * d, e = x + (-b + disc) * d;
  return 0.5 * std::log((distance(a, y) * distance(x, e)) / (distance(a, x) * distance(y, e)));
}

// Metric as the derivative of the distance along v.
double klein_metric_fd(const Vec& p, const Vec& v) {
  const double t = 1e-6;
  return (klein_distance(p, p + t * v) + klein_distance(p, p - t * v)) / (2.0 * t);
}

// int_0^s dt / (1 - t^2) by the midpoint rule.
double poincare_length(double s) {
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = s * (i + 0.5) / n;
    sum += 1.0 / (1.0 - t * t);
  }
  return sum * s / n;
}

}  // namespace

TEST_CASE("bck metric") {
  CHECK(bck_metric(Vec{0, 0, 0}, Vec{0.3, -0.4, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(bck_metric(Vec{0.5, 0, 0}, Vec{1, 0, 0}) - klein_metric_fd(Vec{0.5, 0, 0}, Vec{1, 0, 0})) < 1e-6);
  CHECK(std::abs(bck_metric(Vec{0.5, 0, 0}, Vec{0, 1, 0}) - klein_metric_fd(Vec{0.5, 0, 0}, Vec{0, 1, 0})) < 1e-6);
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const Vec p = rng.unit_vec(3) * (0.9 * rng.uniform());
    const Vec v = rng.unit_vec(3);
    const double b = bck_metric(p, v);
    CHECK(std::abs(b - klein_metric_fd(p, v)) < 1e-5 * b);
  }
  CHECK_THROWS_AS(bck_metric(Vec{1, 0, 0}, Vec{0, 1, 0}), PreconditionError);
}

TEST_CASE("disc search on the unit ball") {
  const BallDomain ball(3, 1.0);
  const MetricEstimate c = metric_upper_bound(ball, Vec{0, 0, 0}, Vec{0, 0, 1});
  REQUIRE(c.found);
  CHECK(std::abs(c.bound - 1.0) < 1e-6);
  CHECK(c.certified_samples == 1 + 32 * 64 + 1000);

  const MetricEstimate a = metric_upper_bound(ball, Vec{0.5, 0, 0}, Vec{1, 0, 0});
  CHECK(a.bound >= klein_metric_fd(Vec{0.5, 0, 0}, Vec{1, 0, 0}) - 1e-6);
  CHECK(a.bound <= 1.01 * klein_metric_fd(Vec{0.5, 0, 0}, Vec{1, 0, 0}));
  const MetricEstimate b = metric_upper_bound(ball, Vec{0.5, 0, 0}, Vec{0, 1, 0});
  CHECK(b.bound >= klein_metric_fd(Vec{0.5, 0, 0}, Vec{0, 1, 0}) - 1e-6);
  CHECK(b.bound <= 1.01 * klein_metric_fd(Vec{0.5, 0, 0}, Vec{0, 1, 0}));
  // Scaling v scales the bound.
  const MetricEstimate b2 = metric_upper_bound(ball, Vec{0.5, 0, 0}, Vec{0, 3, 0});
  CHECK(b2.bound == doctest::Approx(3.0 * b.bound).epsilon(1e-9));

  // The witness disc reproduces the bound and lies in the ball.
  REQUIRE(b.found);
  CHECK(std::abs(b.e1.dot(b.e2)) < 1e-12);
  CHECK(distance(b.center + b.offset, b.p) < 1e-12);
  const double r = (b.radius * b.radius - b.offset.norm2()) / b.radius;
  CHECK(std::abs(1.0 / r - b.bound) < 1e-12);
  Rng rng(22);
  for (int i = 0; i < 2000; ++i) {
    const double t = b.radius * std::sqrt(rng.uniform()), ang = rng.uniform(0.0, 2.0 * M_PI);
    CHECK(ball.value(b.center + (t * std::cos(ang)) * b.e1 + (t * std::sin(ang)) * b.e2) < 0.0);
  }

  for (int i = 0; i < 8; ++i) {
    const Vec p = rng.unit_vec(3) * (0.9 * std::cbrt(rng.uniform()));
    const Vec v = rng.unit_vec(3);
    const double oracle = klein_metric_fd(p, v);
    const MetricEstimate e = metric_upper_bound(ball, p, v);
    INFO("p = ", format_vec(p), " v = ", format_vec(v));
    CHECK(e.bound >= oracle - 1e-6);
    CHECK(e.bound <= 1.01 * oracle);
  }
  CHECK_THROWS_AS(metric_upper_bound(ball, Vec{1.5, 0, 0}, Vec{1, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(metric_upper_bound(ball, Vec{0, 0, 0}, Vec{0, 0, 0}), PreconditionError);
}

TEST_CASE("disc search monotone under inclusion and on a halfspace") {
  const BallDomain small(3, 1.0), big(3, 1.3);
  Rng rng(23);
  for (int i = 0; i < 4; ++i) {
    const Vec p = rng.unit_vec(3) * (0.8 * rng.uniform());
    const Vec v = rng.unit_vec(3);
    CHECK(metric_upper_bound(small, p, v).bound >= metric_upper_bound(big, p, v).bound - 1e-9);
  }
  const HalfspaceDomain half(3);
  // Vertical direction at depth 1: half-plane discs give 1/2 in the limit of
  // large radius; the radius cap of 10^3 leaves D / (2D - 1).
  const MetricEstimate up = metric_upper_bound(half, Vec{0, 0, -1}, Vec{0, 0, 1});
  CHECK(up.bound >= 0.5);
  CHECK(up.bound <= 0.501);
  CHECK(up.qualifier == "upper bound only");
  const MetricEstimate flat = metric_upper_bound(half, Vec{0, 0, -1}, Vec{1, 0, 0});
  CHECK(flat.bound <= 2e-3);
}

TEST_CASE("Omega_D membership") {
  const OmegaD dom([](double x, double y) { return !(x == 3.0 && y == 0.0) && !(x == -3.0 && y == 0.0); }, "C minus two points",
                   {{3.0, 0.0}, {-3.0, 0.0}});
  CHECK(omega_d_membership(dom, Vec{0, 0, 0}));
  CHECK_FALSE(omega_d_membership(dom, Vec{10, 0, 0.5}));
  CHECK(omega_d_membership(dom, Vec{10, 0, 0.05}));
  CHECK_FALSE(omega_d_membership(dom, Vec{3, 0, 0}));
  CHECK(omega_d_membership(dom, Vec{3, 0, 1e-9}));
  CHECK_FALSE(omega_d_membership(dom, Vec{0, 0, 1}));
  CHECK(dom.omitted().size() == 2);
}

TEST_CASE("Omega_D distance chain") {
  const OmegaD dom([](double x, double y) { return !(x == 3.0 && y == 0.0) && !(x == -3.0 && y == 0.0); });
  const Vec p{0, 0, 0}, q{1, 0, 0};
  CHECK(omega_d_distance_chain(dom, p, p, 10).total == 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int k : {10, 100, 1000, 10000}) {
    const ChainBound b = omega_d_distance_chain(dom, p, q, k);
    CHECK(b.radius_p == 0.5);
    CHECK(b.radius_q == 0.5);
    const double oracle = 2.0 * poincare_length(1.0 / (k * 0.5)) + poincare_length(1.0 / k);
    CHECK(std::abs(b.total - oracle) < 1e-9);
    CHECK(b.total < prev);
    prev = b.total;
  }
  CHECK(omega_d_distance_chain(dom, p, q, 1000).total < 0.05);
  CHECK(prev < 0.01);

  // A thin slice forces smaller vertical discs.
  const OmegaD round([](double x, double y) { return x * x + y * y < 1.1025; });
  const ChainBound b = omega_d_distance_chain(round, p, q, 100);
  CHECK(b.radius_p == 0.5);
  CHECK(b.radius_q == 0.25);
  const OmegaD tight([](double x, double y) { return x * x + y * y < 1.0 + 1e-13; });
  CHECK_THROWS_AS(omega_d_distance_chain(tight, p, q, 100), PreconditionError);
  CHECK_THROWS_AS(omega_d_distance_chain(dom, p, Vec{1, 0, 0.1}, 100), PreconditionError);
  CHECK_THROWS_AS(omega_d_distance_chain(dom, p, q, 1), PreconditionError);
}

TEST_CASE("convex classifier") {
  Rng rng(24);
  const HalfspaceIntersection slab{{Vec{0, 0, 1}, Vec{0, 0, -1}}, {1.0, 1.0}};
  const ConvexClassification s = convex_contains_2plane(slab, Vec{0, 0, 0}, rng, 2000);
  CHECK(s.rank == 1);
  CHECK(s.contains_2plane);
  REQUIRE(s.plane.has_value());
  CHECK(std::abs(s.plane->first[2]) < 1e-12);
  CHECK(std::abs(s.plane->second[2]) < 1e-12);
  CHECK(s.plane_checks == 441);
  CHECK_FALSE(s.complete_hyperbolic);

  const HalfspaceIntersection wedge{{Vec{0, 1, 0}, Vec{0, 0, 1}}, {0.0, 0.0}};
  const ConvexClassification w = convex_contains_2plane(wedge, Vec{0, -1, -1}, rng, 10000);
  CHECK(w.rank == 2);
  CHECK_FALSE(w.contains_2plane);
  CHECK(w.trials == 10000);
  CHECK(w.trials_exited == 10000);
  CHECK(w.max_exit_radius <= 1e6);
  CHECK(w.complete_hyperbolic);

  const HalfspaceIntersection whole{};
  const ConvexClassification e = convex_contains_2plane(whole, Vec{0, 0, 0}, rng, 100);
  CHECK(e.rank == 0);
  CHECK(e.contains_2plane);
  CHECK(e.trials_exited == 0);

  // Two independent functionals in R^4 leave a 2-dimensional common kernel.
  const HalfspaceIntersection r4{{Vec{1, 1, 0, 0}, Vec{0, 0, 1, 0}}, {1.0, 1.0}};
  const ConvexClassification f = convex_contains_2plane(r4, Vec{0, 0, 0, 0}, rng, 100);
  CHECK(f.rank == 2);
  CHECK(f.contains_2plane);

  CHECK_THROWS_AS(convex_contains_2plane(wedge, Vec{0, 1, -1}, rng), PreconditionError);
  const HalfspaceIntersection zero{{Vec{0, 0, 0}}, {1.0}};
  CHECK_THROWS_AS(convex_contains_2plane(zero, Vec{0, 0, 0}, rng), PreconditionError);
}
