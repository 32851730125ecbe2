#include "mcx/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcx/parallel.hpp"

namespace mcx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double ConvexProfile::inverse(double y) const {
  if (!(1.0 + alpha * y > 0.0)) {
    throw PreconditionError("profile inverse: y = " + std::to_string(y) + " is outside the range of h", {y});
  }
  return std::log1p(alpha * y) / alpha;
}

ConvexProfile make_profile(double alpha, int m, double epsilon) {
  if (m < 1) throw PreconditionError("make_profile: m must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("make_profile: epsilon must be positive and finite");
  const double threshold = (m - 1) / epsilon;
  if (!(alpha > threshold) || !(alpha > 0.0) || !std::isfinite(alpha)) {
    throw PreconditionError("make_profile: need alpha > (m-1)/epsilon strictly (alpha = " + std::to_string(alpha) +
                                ", (m-1)/epsilon = " + std::to_string(threshold) + ")",
                            {alpha, threshold});
  }
  return ConvexProfile{alpha, m, epsilon};
}

double default_alpha(int m, double epsilon) { return std::max(2.0 * (m - 1) / epsilon, 1.0 / epsilon); }

double profile_radius(const ConvexProfile& p) {
  if (p.m == 1) return kInf;
  return std::log(p.alpha * p.epsilon / (p.m - 1)) / p.alpha;
}

TubularCollar choose_collar(const ConvexProfile& profile, double epsilon, double safety, const CollarRatios& ratios) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("choose_collar: epsilon must be positive");
  if (!(safety > 0.0 && safety < 1.0)) {
    throw PreconditionError("choose_collar: safety must lie in (0, 1), got " + std::to_string(safety), {safety});
  }
  if (!(ratios.eps0 > 0.0 && ratios.eps0 < 1.0 && ratios.eps1 > 0.0 && ratios.eps1 < ratios.eps2 &&
        ratios.eps2 < 1.0)) {
    throw PreconditionError("choose_collar: ratios must satisfy 0 < eps1 < eps2 < 1 and 0 < eps0 < 1",
                            {ratios.eps0, ratios.eps2, ratios.eps1});
  }
  const double tstar = profile_radius(profile);
  if (!(tstar > 0.0)) throw PreconditionError("choose_collar: profile radius is not positive", {tstar});

  TubularCollar c;
  c.reach = epsilon;
  c.eps0p = safety * std::min(0.5 * epsilon, tstar);
  c.eps0 = ratios.eps0 * c.eps0p;
  c.eps2 = ratios.eps2 * c.eps0;
  c.eps1 = ratios.eps1 * c.eps0;
  c.validate();
  const double need = (profile.m - 1) / profile.epsilon;
  if (!(profile.hddot(-c.eps0p) > need)) {
    throw Error("choose_collar: h'' <= (m-1)/epsilon at -eps0'", {c.eps0p, profile.hddot(-c.eps0p), need});
  }
  return c;
}

SmoothingCap::SmoothingCap(double lo, double hi, int degree) : a_(lo), b_(hi), w_(hi - lo), degree_(degree) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw PreconditionError("smoothing cap: degenerate interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "]",
                            {lo, hi});
  }
  if (degree != 3 && degree != 5) throw PreconditionError("smoothing cap: degree must be 3 or 5", {double(degree)});
  // Both smoothsteps integrate to w/2 over [lo, hi], so chi(hi) = hi forces this.
  base_ = b_ - 0.5 * w_;
}

double SmoothingCap::chi(double t) const {
  if (t <= a_) return base_;
  if (t >= b_) return t;
  const double s = (t - a_) / w_;
  const double s2 = s * s, s4 = s2 * s2;
  if (degree_ == 3) return base_ + w_ * (s2 * s - 0.5 * s4);
  return base_ + w_ * (s4 * s2 - 3.0 * s4 * s + 2.5 * s4);
}

double SmoothingCap::chi_dot(double t) const {
  if (t <= a_) return 0.0;
  if (t >= b_) return 1.0;
  const double s = (t - a_) / w_;
  if (degree_ == 3) return s * s * (3.0 - 2.0 * s);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double SmoothingCap::chi_ddot(double t) const {
  if (t <= a_ || t >= b_) return 0.0;
  const double s = (t - a_) / w_;
  if (degree_ == 3) return 6.0 * s * (1.0 - s) / w_;
  const double q = s * (1.0 - s);
  return 30.0 * q * q / w_;
}

std::shared_ptr<const Cap> make_cap(const TubularCollar& collar, const ConvexProfile& profile, int degree) {
  const double a = profile.h(-collar.eps2);
  const double b = profile.h(-collar.eps1);
  if (!(a < b && b < 0.0)) throw PreconditionError("make_cap: need h(-eps2) < h(-eps1) < 0", {a, b});
  auto cap = std::make_shared<SmoothingCap>(a, b, degree);
  for (int i = 1; i <= 1000; ++i) {
    const double t = a + (b - a) * i / 1001.0;
    const double dd = cap->chi_ddot(t), d = cap->chi_dot(t);
    if (!(dd >= 0.0) || !(d >= 0.0 && d <= 1.0)) {
      throw Error("make_cap: cap is not convex increasing at t = " + std::to_string(t), {t, d, dd});
    }
  }
  return cap;
}

double rho0(const ImplicitDomain& domain, const TubularCollar& collar, const ConvexProfile& profile, const Vec& x) {
  const double delta = signed_distance(domain, x, collar.projection).delta;
  return delta > -collar.eps0 ? profile.h(delta) : profile.h(-collar.eps0);
}

BarrierFunction::BarrierFunction(std::shared_ptr<const ImplicitDomain> domain, TubularCollar collar,
                                 ConvexProfile profile, std::shared_ptr<const Cap> cap, int m)
    : domain_(std::move(domain)), collar_(collar), profile_(profile), cap_(std::move(cap)), m_(m) {
  if (!domain_ || !cap_) throw PreconditionError("barrier: missing domain or cap");
  collar_.validate();
  c_ = -1.0 / profile_.h(-collar_.eps1);
  if (!(c_ > 0.0) || !std::isfinite(c_)) throw PreconditionError("barrier: scale c must be positive", {c_});
}

BarrierSample BarrierFunction::evaluate(const Vec& x, bool value_only) const {
  const int n = dim();
  BarrierSample s;
  ProjectionResult proj = signed_distance(*domain_, x, collar_.projection);
  s.delta = proj.delta;
  s.rho0 = s.delta > -collar_.eps0 ? profile_.h(s.delta) : profile_.h(-collar_.eps0);
  s.value = c_ * cap_->chi(s.rho0);
  s.plateau = s.rho0 <= cap_->lo();
  if (value_only) return s;

  if (s.plateau) {
    s.gradient = Vec(n);
    s.hessian = SymMatrix(n);
    s.eigen_list.assign(static_cast<std::size_t>(n), 0.0);
    return s;
  }
  const DistanceJet j = distance_jet(*domain_, std::move(proj));
  const double hd = profile_.hdot(s.delta), hdd = profile_.hddot(s.delta);
  const double cd = cap_->chi_dot(s.rho0), cdd = cap_->chi_ddot(s.rho0);
  s.gradient = (c_ * cd * hd) * j.gradient;
  const double normal = c_ * (cd * hdd + cdd * hd * hd);
  s.hessian = (c_ * cd * hd) * j.hessian;
  s.hessian.add_outer(j.gradient, normal);
  s.eigen_list.reserve(static_cast<std::size_t>(n));
  for (double nu : j.transported) s.eigen_list.push_back(c_ * cd * hd * nu);
  s.eigen_list.push_back(normal);
  return s;
}

double BarrierFunction::value(const Vec& x) const { return evaluate(x, true).value; }
Vec BarrierFunction::gradient(const Vec& x) const { return evaluate(x).gradient; }
SymMatrix BarrierFunction::hessian(const Vec& x) const { return evaluate(x).hessian; }

double BarrierFunction::level_depth(double t) const {
  if (!(t > -1.0 && t <= 0.0)) throw PreconditionError("level_depth: t must lie in (-1, 0]", {t});
  return profile_.inverse(t / c_);
}

BarrierFunction build_barrier(std::shared_ptr<const ImplicitDomain> domain, int m, double epsilon,
                              const BarrierOptions& o) {
  if (!domain) throw PreconditionError("build_barrier: missing domain");
  const int n = domain->dim();
  if (m < 1 || m > n - 1) throw PreconditionError("build_barrier: m out of range [1, n-1]", {double(m)});
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("build_barrier: epsilon must be positive");
  const ConvexProfile profile = make_profile(o.alpha.value_or(default_alpha(m, epsilon)), m, epsilon);

  Rng rng(o.seed);
  const Box region = o.region.value_or(domain->default_region());
  const std::vector<Vec> samples = domain->sample_boundary(region, o.convexity_samples, rng);
  if (samples.empty()) throw PreconditionError("build_barrier: no boundary samples in the region");
  for (const Vec& p : samples) {
    const SurfacePoint sp = principal_curvatures(*domain, p);
    double scale = 1.0;
    for (double nu : sp.curvatures) scale = std::max(scale, std::abs(nu));
    const double sigma = m_convexity_defect(sp, m);
    if (sigma < -1e-9 * scale) {
      std::vector<double> loc = p.to_vector();
      loc.push_back(sigma);
      throw PreconditionError("build_barrier: domain is not " + std::to_string(m) + "-convex at " + format_vec(p) +
                                  " (sigma_m = " + std::to_string(sigma) + ")",
                              loc);
    }
  }

  double reach;
  if (o.reach) {
    reach = *o.reach;
  } else if (auto declared = domain->declared_reach()) {
    reach = *declared;
  } else {
    ReachSettings rs;
    rs.probe_count = 16;
    rs.projection = o.projection;
    reach = reach_estimate(*domain, samples, rs).value;
  }
  if (epsilon > reach * (1.0 + 1e-12)) {
    throw PreconditionError("build_barrier: epsilon = " + std::to_string(epsilon) + " exceeds the reach " +
                                std::to_string(reach),
                            {epsilon, reach});
  }

  TubularCollar collar = choose_collar(profile, epsilon, o.safety, o.ratios);
  collar.reach = std::max(reach, epsilon);
  collar.projection = o.projection;
  collar.validate();
  auto cap = make_cap(collar, profile, o.cap_degree);
  return BarrierFunction(std::move(domain), collar, profile, std::move(cap), m);
}

BarrierVerifySpec make_verify_spec(const BarrierFunction& bf, const GridSpec& grid, int boundary_count, Rng& rng) {
  BarrierVerifySpec spec;
  for (const Vec& p : grid.points())
    if (bf.domain().value(p) <= 0.0) spec.interior.push_back(p);
  spec.boundary = bf.domain().sample_boundary(grid.region, boundary_count, rng);
  return spec;
}

namespace {

// Worst-sample aggregation for one named check.
struct Tally {
  std::string name;
  double threshold;
  bool lower_is_worse;  // pass iff value >= threshold (else value <= threshold)
  bool strict = false;  // pass iff value > threshold (or < threshold)
  double worst;
  Vec where;
  bool any = false;
  bool ok = true;

  Tally(std::string n, double thr, bool lower_worse)
      : name(std::move(n)), threshold(thr), lower_is_worse(lower_worse), worst(lower_worse ? kInf : -kInf) {}

  bool add(double v, const Vec& x) {
    const bool pass = lower_is_worse ? (strict ? v > threshold : v >= threshold)
                                     : (strict ? v < threshold : v <= threshold);
    if (!pass) ok = false;
    if (!any || (lower_is_worse ? v < worst : v > worst) || !(v == v)) {
      worst = v;
      where = x;
    }
    any = true;
    return pass;
  }

  CheckRecord record() const { return {name, where, any ? worst : 0.0, threshold, any && ok}; }
};

}  // namespace

BarrierVerifyReport verify_barrier(const BarrierFunction& bf, const BarrierVerifySpec& spec) {
  if (spec.interior.empty() || spec.boundary.empty()) throw PreconditionError("verify_barrier: empty sample sets");
  BarrierVerifyReport rep;
  const double c = bf.scale();
  auto fail = [&](const std::string& name, const Vec& x, double v, double thr) {
    if (rep.failures.size() < 200) rep.failures.push_back({name, x, v, thr, false});
  };

  // (a) m-psh over the interior grid.
  rep.grid = grid_verdict(bf, spec.interior, bf.m(), spec.psh_tol, spec.workers);
  {
    Tally t("m_psh_margin", -spec.psh_tol, true);
    t.any = rep.grid.total > 0;
    t.worst = rep.grid.worst_margin;
    t.where = rep.grid.worst_point;
    t.ok = rep.grid.violated == 0;
    rep.checks.push_back(t.record());
    for (const PshVerdict& v : rep.grid.violations) fail("m_psh_margin", v.x, v.margin, -spec.psh_tol);
  }

  // Per-sample quantities over the interior grid.
  std::vector<BarrierSample> samples(spec.interior.size());
  parallel_for(spec.interior.size(), spec.workers, [&](std::size_t i) { samples[i] = bf.evaluate(spec.interior[i]); });

  Tally nonpos("rho_nonpositive", 0.0, false);
  Tally strict("rho_negative_inside", 0.0, false);
  strict.strict = true;
  Tally grad("grad_rho_nonzero", spec.gradient_floor * c, true);
  Tally eig("eigen_list_match", spec.eigen_tol, false);
  Tally plateau("plateau_constant", 0.0, false);
  const double plateau_value = bf.plateau_value();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const BarrierSample& s = samples[i];
    const Vec& x = spec.interior[i];
    if (!nonpos.add(s.value, x)) fail(nonpos.name, x, s.value, 0.0);
    if (bf.domain().value(x) < 0.0 && !strict.add(s.value, x)) fail(strict.name, x, s.value, 0.0);
    if (s.value > -1.0) {
      const double g = s.gradient.norm();
      if (!grad.add(g, x)) fail(grad.name, x, g, grad.threshold);
    }
    if (s.plateau) {
      const double d = std::abs(s.value - plateau_value);
      if (!plateau.add(d, x)) fail(plateau.name, x, d, 0.0);
    } else {
      const EigenDecomposition e = sym_eigen(s.hessian);
      std::vector<double> list = s.eigen_list;
      std::sort(list.begin(), list.end());
      double err = 0.0;
      for (std::size_t k = 0; k < list.size(); ++k) err = std::max(err, std::abs(list[k] - e.values[k]));
      if (!eig.add(err, x)) fail(eig.name, x, err, eig.threshold);
    }
  }
  rep.checks.push_back(nonpos.record());
  rep.checks.push_back(strict.record());
  rep.checks.push_back(grad.record());
  rep.checks.push_back(eig.record());
  if (plateau.any) rep.checks.push_back(plateau.record());

  // (b) rho = 0 on M.
  Tally zero("rho_zero_on_boundary", spec.boundary_tol, false);
  std::vector<double> bvals(spec.boundary.size());
  parallel_for(spec.boundary.size(), spec.workers, [&](std::size_t i) { bvals[i] = bf.value(spec.boundary[i]); });
  for (std::size_t i = 0; i < bvals.size(); ++i)
    if (!zero.add(std::abs(bvals[i]), spec.boundary[i])) fail(zero.name, spec.boundary[i], bvals[i], spec.boundary_tol);
  rep.checks.push_back(zero.record());

  // (e) {rho = t} is {delta = h^{-1}(t/c)}: bisect rho along inner normals.
  const std::size_t rays = std::min<std::size_t>(spec.boundary.size(), static_cast<std::size_t>(std::max(spec.level_rays, 0)));
  const std::size_t levels = static_cast<std::size_t>(std::max(spec.levels, 0));
  std::vector<double> level_err(rays * levels, 0.0);
  std::vector<Vec> level_at(rays * levels);
  const double depth = bf.collar().eps1;
  parallel_for(rays * levels, spec.workers, [&](std::size_t idx) {
    const std::size_t r = idx / levels, k = idx % levels;
    const double t = -static_cast<double>(k + 1) / static_cast<double>(levels + 1);
    const Vec& p = spec.boundary[r * spec.boundary.size() / rays];
    const Vec nrm = principal_curvatures(bf.domain(), p).inner_normal;
    double lo = 0.0, hi = depth;
    for (int it = 0; it < 100 && hi - lo > 1e-15 * (1.0 + depth); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (bf.value(p + mid * nrm) > t) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const Vec x = p + (0.5 * (lo + hi)) * nrm;
    const double delta = signed_distance(bf.domain(), x, bf.collar().projection).delta;
    level_err[idx] = std::abs(delta - bf.level_depth(t));
    level_at[idx] = x;
  });
  Tally lvl("level_set_depth", spec.level_tol, false);
  for (std::size_t i = 0; i < level_err.size(); ++i)
    if (!lvl.add(level_err[i], level_at[i])) fail(lvl.name, level_at[i], level_err[i], spec.level_tol);
  if (lvl.any) rep.checks.push_back(lvl.record());
  return rep;
}

}  // namespace mcx
