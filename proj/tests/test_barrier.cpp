#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "mcx/barrier.hpp"
#include "mcx/catalog.hpp"

using namespace mcx;

namespace {

// Complement of the unit ball: both curvatures are -1.
class BallExterior final : public ImplicitDomain {
 public:
  int dim() const override { return 3; }
  std::string name() const override { return "ball-exterior"; }
  double value(const Vec& x) const override { return (1.0 - x.norm2()) / 2.0; }
  Vec gradient(const Vec& x) const override { return -x; }
  SymMatrix hessian(const Vec&) const override { return SymMatrix::diagonal(Vec{-1, -1, -1}); }
  std::vector<Vec> sample_boundary(const Box&, int count, Rng& rng) const override {
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) out.push_back(rng.unit_vec(3));
    return out;
  }
};

// Cap whose second derivative is negative on the transition interval.
class TamperedCap final : public Cap {
 public:
  explicit TamperedCap(std::shared_ptr<const Cap> base) : base_(std::move(base)) {}
  double lo() const override { return base_->lo(); }
  double hi() const override { return base_->hi(); }
  double chi(double t) const override { return base_->chi(t); }
  double chi_dot(double t) const override { return base_->chi_dot(t); }
  double chi_ddot(double t) const override {
    return (t > lo() && t < hi()) ? -1000.0 : base_->chi_ddot(t);
  }

 private:
  std::shared_ptr<const Cap> base_;
};

std::vector<double> sorted_eigs(const SymMatrix& h) { return sym_eigen(h).values; }

// Richardson-extrapolated central differences, O(step^4).
SymMatrix hessian_richardson(const Field& f, const Vec& x) {
  const double h = default_fd_step(x);
  const SymMatrix coarse = hessian_fd(f.as_function(), x, h);
  const SymMatrix fine = hessian_fd(f.as_function(), x, 0.5 * h);
  return (4.0 / 3.0) * fine + (-1.0 / 3.0) * coarse;
}

}  // namespace

TEST_CASE("profile") {
  const ConvexProfile p = make_profile(4.0, 2, 1.0);
  CHECK(p.h(0.0) == 0.0);
  CHECK(p.hdot(0.0) == 1.0);
  CHECK(p.hddot(0.0) == 4.0);
  // Series oracle for (e^{at} - 1)/a.
  double series = 0.0, term = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= -1.0 / k;
    series += term / 4.0;
  }
  CHECK(std::abs(p.h(-0.25) - series) < 1e-15);
  CHECK(std::abs(p.h(-0.25) + 0.1580301) < 1e-7);
  for (double t = -3.0; t < 0.0; t += 0.01) {
    CHECK(p.h(t) < 0.0);
    CHECK(p.hdot(t) >= 0.0);
    CHECK(p.hdot(t) < 1.0);
    // log1p near -1 amplifies rounding in h(t) by e^{-alpha t} / alpha.
    CHECK(std::abs(p.inverse(p.h(t)) - t) < 1e-14 + 1e-15 * std::exp(-4.0 * t));
  }
  CHECK_NOTHROW(make_profile(1.0001, 2, 1.0));
  CHECK_THROWS_AS(make_profile(1.0, 2, 1.0), PreconditionError);
  CHECK(default_alpha(2, 1.0) == 2.0);
  CHECK(default_alpha(1, 0.5) == 2.0);
}

TEST_CASE("collar") {
  const ConvexProfile p = make_profile(4.0, 2, 1.0);
  // Bisection oracle for 4 e^{-4t} = 1.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (4.0 * std::exp(-4.0 * mid) > 1.0 ? lo : hi) = mid;
  }
  CHECK(std::abs(profile_radius(p) - lo) < 1e-14);
  CHECK(std::abs(profile_radius(p) - 0.346574) < 1e-6);
  const TubularCollar c = choose_collar(p, 1.0, 0.99);
  CHECK(std::abs(c.eps0p - 0.343108) < 1e-6);
  CHECK(c.eps0 == doctest::Approx(0.9 * c.eps0p));
  CHECK(c.eps2 == doctest::Approx(0.6 * c.eps0));
  CHECK(c.eps1 == doctest::Approx(0.3 * c.eps0));
  CHECK_THROWS_AS(choose_collar(p, 1.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(choose_collar(p, -1.0, 0.5), PreconditionError);
  for (double alpha = 1.01; alpha < 1e4; alpha *= 1.7) {
    const ConvexProfile q = make_profile(alpha, 2, 1.0);
    const TubularCollar cq = choose_collar(q, 1.0, 0.99);
    CHECK(q.hddot(-cq.eps0p) > 1.0);
    CHECK(cq.eps0p > 0.0);
  }
}

TEST_CASE("smoothing cap") {
  for (int degree : {3, 5}) {
    const SmoothingCap cap(-0.5, -0.2, degree);
    for (double t = -0.2; t < 1.0; t += 0.013) CHECK(cap.chi(t) - t == 0.0);
    for (double t = -2.0; t <= -0.5; t += 0.013) CHECK(cap.chi_dot(t) == 0.0);
    CHECK(cap.chi_dot(-0.35) == doctest::Approx(0.5).epsilon(1e-14));
    // Continuity of chi and chi' at both ends and chi' = FD of chi inside.
    CHECK(std::abs(cap.chi(-0.2 - 1e-12) + 0.2) < 1e-11);
    CHECK(std::abs(cap.chi(-0.5 + 1e-12) - cap.chi(-0.6)) < 1e-11);
    for (double t = -0.49; t < -0.21; t += 0.01) {
      const double fd = (cap.chi(t + 1e-6) - cap.chi(t - 1e-6)) / 2e-6;
      CHECK(std::abs(fd - cap.chi_dot(t)) < 1e-8);
      const double fdd = (cap.chi_dot(t + 1e-6) - cap.chi_dot(t - 1e-6)) / 2e-6;
      CHECK(std::abs(fdd - cap.chi_ddot(t)) < 1e-6);
      CHECK(cap.chi_ddot(t) >= 0.0);
    }
  }
  CHECK_THROWS_AS(SmoothingCap(0.0, 0.0), PreconditionError);
}

TEST_CASE("rho0") {
  auto ball = std::make_shared<BallDomain>(3, 1.0);
  const ConvexProfile p = make_profile(4.0, 2, 1.0);
  const TubularCollar c = choose_collar(p, 1.0, 0.99);
  CHECK(rho0(*ball, c, p, Vec{1, 0, 0}) == 0.0);
  CHECK(std::abs(rho0(*ball, c, p, Vec{0.9, 0, 0}) - (std::exp(-0.4) - 1.0) / 4.0) < 1e-12);
  CHECK(std::abs(rho0(*ball, c, p, Vec{0.9, 0, 0}) + 0.082420) < 1e-6);
  CHECK(rho0(*ball, c, p, Vec{0.1, 0.2, 0}) == p.h(-c.eps0));
}

TEST_CASE("flat boundary eigenvalues") {
  auto plane = std::make_shared<HalfspaceDomain>(3);
  BarrierOptions o;
  o.alpha = 4.0;
  const BarrierFunction bf = build_barrier(plane, 2, 1.0, o);
  const Vec x{0.3, -0.1, -0.05};
  const BarrierSample s = bf.evaluate(x);
  CHECK(s.eigen_list[0] == 0.0);
  CHECK(s.eigen_list[1] == 0.0);
  const double cd = bf.cap().chi_dot(s.rho0), cdd = bf.cap().chi_ddot(s.rho0);
  const double hd = bf.profile().hdot(s.delta);
  CHECK(s.eigen_list[2] == doctest::Approx(bf.scale() * (cd * bf.profile().hddot(s.delta) + cdd * hd * hd)));
  for (int m = 1; m <= 2; ++m) CHECK(is_m_psh_at(bf, x, m).kind != PshKind::violated);
}

TEST_CASE("unit ball eigenvalues match finite differences") {
  auto ball = std::make_shared<BallDomain>(3, 1.0);
  BarrierOptions o;
  o.alpha = 4.0;
  const BarrierFunction bf = build_barrier(ball, 2, 1.0, o);
  for (const Vec& x : {Vec{0.9, 0, 0}, Vec{0.95, 0, 0}, Vec{0, 0.6, 0.7}, Vec{0.5, 0.5, 0.6}}) {
    const BarrierSample s = bf.evaluate(x);
    std::vector<double> list = s.eigen_list;
    std::sort(list.begin(), list.end());
    const auto fd = sorted_eigs(hessian_richardson(bf, x));
    const auto an = sorted_eigs(s.hessian);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(list[static_cast<std::size_t>(k)] - an[static_cast<std::size_t>(k)]) < 1e-10);
      CHECK(std::abs(fd[static_cast<std::size_t>(k)] - an[static_cast<std::size_t>(k)]) < 1e-6);
    }
  }
  // Inside C_eps1 the list is c {h' nu_j(x), h''} exactly.
  const double r = 1.0 - 0.5 * bf.collar().eps1;
  const BarrierSample s = bf.evaluate(Vec{r, 0, 0});
  const double d = r - 1.0, c = bf.scale();
  CHECK(s.eigen_list[0] == doctest::Approx(c * bf.profile().hdot(d) / r).epsilon(1e-12));
  CHECK(s.eigen_list[2] == doctest::Approx(c * bf.profile().hddot(d)).epsilon(1e-12));
  CHECK(bf.level_depth(-0.5) == doctest::Approx(bf.profile().inverse(-0.5 / c)));
  CHECK(bf.value(Vec{1, 0, 0}) == 0.0);
  CHECK(bf.value(Vec{0, 0, 0}) == bf.plateau_value());
}

TEST_CASE("verification on the unit ball and a tampered cap") {
  auto ball = std::make_shared<BallDomain>(3, 1.0);
  const BarrierFunction bf = build_barrier(ball, 2, 1.0);
  Rng rng(5);
  BarrierVerifySpec spec = make_verify_spec(bf, GridSpec{Box::cube(3, 1.0), {11, 11, 11}}, 60, rng);
  spec.level_rays = 4;
  const BarrierVerifyReport rep = verify_barrier(bf, spec);
  for (const CheckRecord& c : rep.checks) {
    INFO(c.name, " ", c.value, " ", c.threshold);
    CHECK(c.pass);
  }
  CHECK(rep.grid.violated == 0);

  const BarrierFunction bad(ball, bf.collar(), bf.profile(),
                            std::make_shared<TamperedCap>(make_cap(bf.collar(), bf.profile())), 2);
  // Points straddling the transition band of the cap.
  std::vector<Vec> band;
  for (int i = 0; i <= 40; ++i) band.push_back(Vec{1.0 - bf.collar().eps1 - (bf.collar().eps2 - bf.collar().eps1) * i / 40.0, 0, 0});
  BarrierVerifySpec bspec;
  bspec.interior = band;
  bspec.boundary = {Vec{1, 0, 0}};
  bspec.level_rays = 1;
  const BarrierVerifyReport brep = verify_barrier(bad, bspec);
  CHECK_FALSE(brep.pass());
  CHECK(brep.checks.front().name == "m_psh_margin");
  CHECK_FALSE(brep.checks.front().pass);
}

TEST_CASE("catenoid collar grid has no violations") {
  auto cat = std::make_shared<CatenoidDomain>(1.0);
  const BarrierFunction bf = build_barrier(cat, 2, 1.0);
  Rng rng(8);
  const Box region{Vec{-1.6, -1.6, -1.0}, Vec{1.6, 1.6, 1.0}};
  BarrierVerifySpec spec = make_verify_spec(bf, GridSpec{region, {11, 11, 9}}, 40, rng);
  spec.level_rays = 4;
  const BarrierVerifyReport rep = verify_barrier(bf, spec);
  for (const CheckRecord& c : rep.checks) {
    INFO(c.name, " ", c.value, " ", c.threshold, " at ", format_vec(c.location));
    CHECK(c.pass);
  }
}

TEST_CASE("rejections") {
  auto ext = std::make_shared<BallExterior>();
  BarrierOptions o;
  o.reach = 1.0;
  try {
    build_barrier(ext, 2, 0.5, o);
    FAIL("expected rejection");
  } catch (const PreconditionError& e) {
    REQUIRE(e.locator().size() == 4);
    CHECK(e.locator()[3] == doctest::Approx(-2.0));
  }
  auto ball = std::make_shared<BallDomain>(3, 1.0);
  CHECK_THROWS_AS(build_barrier(ball, 2, 1.5), PreconditionError);
  CHECK_THROWS_AS(build_barrier(ball, 3, 1.0), PreconditionError);
  BarrierOptions low;
  low.alpha = 1.0;
  CHECK_THROWS_AS(build_barrier(ball, 2, 1.0, low), PreconditionError);
}

TEST_CASE("m = 1 on a cylinder") {
  auto cyl = std::make_shared<CylinderDomain>(3, 1.0);
  const BarrierFunction bf = build_barrier(cyl, 1, 1.0);
  CHECK(bf.collar().eps0p == doctest::Approx(0.99 * 0.5));
  const auto v = is_m_psh_at(bf, Vec{0.95, 0.0, 0.3}, 1);
  CHECK(v.kind != PshKind::violated);
}
