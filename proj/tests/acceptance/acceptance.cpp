// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// writes every record to acceptance_report.jsonl in the working directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcx/barrier.hpp"
#include "mcx/catalog.hpp"
#include "mcx/cli.hpp"
#include "mcx/discs.hpp"
#include "mcx/hyperbolicity.hpp"
#include "mcx/parallel.hpp"
#include "mcx/tubular.hpp"

using namespace mcx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Outcome {
  std::vector<CheckRecord> records;
  std::string note;
  bool extra_ok = true;  // conditions that are not records (runtime limits)
  bool pass() const { return extra_ok && all_pass(records); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Worst sample of one measured quantity.
struct Worst {
  double value = 0.0;
  Vec where;
  void add(double v, const Vec& x) {
    if (!(v <= value)) value = v, where = x;
  }
};

CheckRecord at_most(const std::string& name, const Worst& w, double tol) {
  return {name, w.where, w.value, tol, w.value <= tol};
}

std::shared_ptr<const CatalogSurface> surface(const std::string& name) { return make_domain(name, {}); }

struct CollarPoint {
  Vec x;
  double t;  // signed distance by construction
};

// x = p + t * (outward normal) with p on M and t uniform in [lo, hi].
std::vector<CollarPoint> collar_points(const ImplicitDomain& dom, int count, double lo, double hi, Rng& rng) {
  const std::vector<Vec> feet = dom.sample_boundary(dom.default_region(), count, rng);
  std::vector<CollarPoint> out;
  for (const Vec& p : feet) {
    const SurfacePoint sp = principal_curvatures(dom, p);
    const double t = rng.uniform(lo, hi);
    out.push_back({p - t * sp.inner_normal, t});
  }
  return out;
}

double collar_width(const ImplicitDomain& dom) {
  const double r = dom.declared_reach().value_or(dom.length_scale());
  return 0.5 * std::min(r, dom.length_scale());
}

Vec central_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

SymMatrix richardson_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  const SymMatrix coarse = hessian_fd(f, x, h);
  const SymMatrix fine = hessian_fd(f, x, 0.5 * h);
  return (4.0 / 3.0) * fine + (-1.0 / 3.0) * coarse;
}

const std::vector<std::string> kDistanceSurfaces = {"sphere", "plane", "cylinder", "slab", "catenoid"};

// 1. |grad delta| = 1 and Hess delta . grad delta = 0.
Outcome distance_fidelity(std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  const int count = 10000;
  std::string times;
  for (const std::string& name : kDistanceSurfaces) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto dom = surface(name);
    const double L = dom->length_scale(), w = collar_width(*dom);
    const std::vector<CollarPoint> pts = collar_points(*dom, count, -w, w, rng);
    struct Sample {
      double fd_norm, an_norm, an_hg, fd_hg;
    };
    std::vector<Sample> s(pts.size());
    parallel_for(pts.size(), workers(), [&](std::size_t i) {
      const Vec& x = pts[i].x;
      auto delta = [&](const Vec& y) { return signed_distance(*dom, y).delta; };
      const Vec gfd = central_gradient(delta, x, 1e-4 * L);
      const DistanceJet j = distance_jet(*dom, x);
      const double h = 1e-3 * L;
      const Vec dg = (grad_delta(*dom, x + h * j.gradient) - grad_delta(*dom, x - h * j.gradient)) / (2.0 * h);
      s[i] = {std::abs(gfd.norm() - 1.0), std::abs(j.gradient.norm() - 1.0), (j.hessian * j.gradient).norm(),
              dg.norm() * L};
    });
    Worst fd_norm, an_norm, an_hg, fd_hg;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      fd_norm.add(s[i].fd_norm, pts[i].x);
      an_norm.add(s[i].an_norm, pts[i].x);
      an_hg.add(s[i].an_hg, pts[i].x);
      fd_hg.add(s[i].fd_hg, pts[i].x);
    }
    const double secs = seconds_since(t0);
    out.records.push_back({name + "/samples", Vec(), static_cast<double>(pts.size()), count, pts.size() >= 10000});
    out.records.push_back(at_most(name + "/grad_norm_fd", fd_norm, 1e-6));
    out.records.push_back(at_most(name + "/grad_norm_analytic", an_norm, 1e-6));
    out.records.push_back(at_most(name + "/hess_grad_analytic", an_hg, 1e-6));
    out.records.push_back(at_most(name + "/hess_grad_fd", fd_hg, 1e-6));
    out.extra_ok = out.extra_ok && secs <= 60.0;
    times += name + " " + fmt("%.1fs ", secs);
  }
  out.note = times;
  return out;
}

// 2. Transported curvatures against the FD Hessian of delta.
Outcome curvature_transport(std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  for (const std::string& name : kDistanceSurfaces) {
    const auto dom = surface(name);
    const double L = dom->length_scale(), w = collar_width(*dom);
    const std::vector<CollarPoint> pts = collar_points(*dom, 1000, -w, w, rng);
    std::vector<double> rel(pts.size()), formula(pts.size());
    parallel_for(pts.size(), workers(), [&](std::size_t i) {
      const Vec& x = pts[i].x;
      auto delta = [&](const Vec& y) { return signed_distance(*dom, y).delta; };
      const DistanceJet j = distance_jet(*dom, x);
      const double t = j.projection.delta;
      std::vector<double> an{0.0};
      double ferr = 0.0;
      for (std::size_t k = 0; k < j.foot.curvatures.size(); ++k) {
        const double nu = j.foot.curvatures[k];
        an.push_back(nu / (1.0 + t * nu));
      }
      std::vector<double> tr = j.transported;
      std::vector<double> own(an.begin() + 1, an.end());
      std::sort(own.begin(), own.end());
      std::sort(tr.begin(), tr.end());
      for (std::size_t k = 0; k < own.size(); ++k) ferr = std::max(ferr, std::abs(own[k] - tr[k]) * L);
      std::sort(an.begin(), an.end());
      const std::vector<double> fd = sym_eigen(richardson_hessian(delta, x, 1e-3 * L)).values;
      double worst = 0.0;
      for (std::size_t k = 0; k < an.size(); ++k)
        worst = std::max(worst, std::abs(fd[k] - an[k]) / std::max(std::abs(an[k]), 1.0 / L));
      rel[i] = worst;
      formula[i] = ferr;
    });
    Worst r, f;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      r.add(rel[i], pts[i].x);
      f.add(formula[i], pts[i].x);
    }
    out.records.push_back(at_most(name + "/fd_relative_error", r, 1e-4));
    out.records.push_back(at_most(name + "/transport_formula", f, 1e-12));
  }
  // Inside the ball of radius R the tangential eigenvalues are 1/(R - |t|).
  const double R = 1.0;
  const auto ball = surface("sphere");
  const std::vector<CollarPoint> inner = collar_points(*ball, 1000, -0.9 * R, 0.0, rng);
  Worst closed;
  for (const CollarPoint& c : inner) {
    const DistanceJet j = distance_jet(*ball, c.x);
    for (double nu : j.transported) closed.add(std::abs(nu - 1.0 / (R - std::abs(c.t))), c.x);
  }
  out.records.push_back(at_most("sphere/closed_form", closed, 1e-8));
  return out;
}

// 3. Curvature bounds with epsilon = the computed reach estimate.
Outcome curvature_bounds(std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  ReachSettings rs;
  rs.workers = workers();
  for (const std::string& name : catalog_names()) {
    const auto dom = surface(name);
    const std::vector<Vec> pts = dom->sample_boundary(dom->default_region(), 1000, rng);
    const ReachEstimate est = reach_estimate(*dom, pts, rs);
    const int m = dom->dim() - 1;
    const CurvatureBoundsReport cb = curvature_bounds_check(*dom, est.value, m, pts);
    out.records.push_back({name + "/reach_estimate", est.focal_witness, est.value, 0.0, est.value > 0.0});
    out.records.push_back({name + "/upper_margin", Vec(), cb.upper_margin, 0.0, cb.upper_margin >= -cb.tolerance});
    out.records.push_back({name + "/lower_margin", Vec(), cb.lower_margin, 0.0, cb.lower_margin >= -cb.tolerance});
    out.records.push_back({name + "/negative_part_margin", Vec(), cb.negative_part_margin, 0.0,
                           cb.negative_part_margin >= -cb.tolerance});
    out.records.push_back({name + "/violations", cb.violations.empty() ? Vec() : cb.violations.front().point,
                           static_cast<double>(cb.violations.size()), 0.0, cb.violations.empty()});
  }
  return out;
}

struct BarrierCase {
  std::string name;
  DomainPtr domain;
  GridSpec grid;
};

std::vector<BarrierCase> barrier_cases() {
  auto cube = [](double hx, double hy, double hz) { return Box{Vec{-hx, -hy, -hz}, Vec{hx, hy, hz}}; };
  return {
      {"ball", surface("sphere"), GridSpec{cube(1.0, 1.0, 1.0), {28, 28, 28}}},
      {"slab", surface("slab"), GridSpec{cube(1.5, 1.5, 1.0), {22, 22, 22}}},
      {"catenoid", surface("catenoid"), GridSpec{cube(1.6, 1.6, 1.0), {32, 32, 32}}},
  };
}

BarrierFunction barrier_for(const BarrierCase& c, std::uint64_t seed) {
  BarrierOptions o;
  o.seed = seed;
  return build_barrier(c.domain, 2, *c.domain->declared_reach(), o);
}

// 4. The barrier is m-psh, vanishes on M, has nonvanishing gradient and the
// prescribed level sets.
Outcome barrier_construction(std::uint64_t seed) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  for (const BarrierCase& c : barrier_cases()) {
    Rng rng(seed);
    const BarrierFunction bf = barrier_for(c, seed);
    BarrierVerifySpec spec = make_verify_spec(bf, c.grid, 200, rng);
    spec.levels = 10;
    spec.level_rays = 16;
    spec.workers = workers();
    const BarrierVerifyReport v = verify_barrier(bf, spec);
    for (const CheckRecord& r : v.checks) {
      CheckRecord copy = r;
      copy.name = c.name + "/" + r.name;
      out.records.push_back(copy);
    }
    out.records.push_back({c.name + "/grid_samples", Vec(), static_cast<double>(v.grid.total), 1e4,
                           v.grid.total >= 10000});
    out.records.push_back({c.name + "/grid_violations", v.grid.worst_point, static_cast<double>(v.grid.violated), 0.0,
                           v.grid.violated == 0});
  }
  const double secs = seconds_since(t0);
  out.extra_ok = secs <= 300.0;
  out.note = fmt("%.1fs total", secs);
  return out;
}

// 5. Analytic eigenvalue list against the FD Hessian of rho in the inner collar.
// rho is only piecewise smooth across delta = -eps1 and -eps2, where the cap's
// polynomial pieces meet, so samples whose FD stencil crosses those levels are
// redrawn.
Outcome eigen_list_identity(std::uint64_t seed) {
  Outcome out;
  for (const BarrierCase& c : barrier_cases()) {
    Rng rng(seed);
    const BarrierFunction bf = barrier_for(c, seed);
    const TubularCollar& col = bf.collar();
    std::vector<CollarPoint> pts;
    std::size_t redrawn = 0;
    while (pts.size() < 1000) {
      for (const CollarPoint& p : collar_points(*c.domain, 1000, -col.eps0, 0.0, rng)) {
        const double reach = 2.0 * std::sqrt(2.0) * default_fd_step(p.x);
        const bool crosses = std::abs(p.t + col.eps1) <= reach || std::abs(p.t + col.eps2) <= reach;
        if (crosses) {
          ++redrawn;
        } else if (pts.size() < 1000) {
          pts.push_back(p);
        }
      }
    }
    std::vector<double> err(pts.size());
    parallel_for(pts.size(), workers(), [&](std::size_t i) {
      const Vec& x = pts[i].x;
      std::vector<double> list = bf.eigenvalue_list(x);
      std::sort(list.begin(), list.end());
      const std::vector<double> fd =
          sym_eigen(richardson_hessian(bf.as_function(), x, default_fd_step(x))).values;
      double worst = 0.0;
      for (std::size_t k = 0; k < list.size(); ++k)
        worst = std::max(worst, std::abs(fd[k] - list[k]) / std::max(1.0, std::abs(list[k])));
      err[i] = worst;
    });
    Worst w;
    for (std::size_t i = 0; i < pts.size(); ++i) w.add(err[i], pts[i].x);
    const std::string& tag = c.name;
    out.records.push_back({tag + "/samples", Vec(), static_cast<double>(pts.size()), 1000, pts.size() >= 1000});
    out.records.push_back({tag + "/redrawn_near_cap_breakpoints", Vec(), static_cast<double>(redrawn), 0.0, true});
    out.records.push_back(at_most(tag + "/fd_eigen_error", w, 1e-6));
  }
  return out;
}

Mat random_rotation(Rng& rng) {
  const std::vector<Vec> raw{rng.normal_vec(3), rng.normal_vec(3), rng.normal_vec(3)};
  const std::vector<Vec> q = orthonormalize(raw);
  Mat r(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = q[static_cast<std::size_t>(i)][j];
  return r;
}

// Scaled and moved copy of a patch that stays within |x| <= 0.95 on its lattice.
std::shared_ptr<const ConformalMap> fit_in_unit_ball(std::shared_ptr<const ConformalMap> base, Rng& rng) {
  double reach = 0.0;
  for (Complex z : base->domain().lattice(15, 15)) reach = std::max(reach, (*base)(z).norm());
  const Vec offset = rng.unit_vec(3) * rng.uniform(0.0, 0.2);
  const double scale = (0.95 - offset.norm()) / reach;
  return std::make_shared<SimilarityMap>(base, scale, random_rotation(rng), offset);
}

// 6. rho o f is subharmonic for conformal harmonic discs inside the barrier's domain.
Outcome subharmonicity(std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  const BarrierCase ball = barrier_cases()[0], slab = barrier_cases()[1];
  const BarrierFunction rho_ball = barrier_for(ball, seed);
  const BarrierFunction rho_slab = barrier_for(slab, seed);

  struct Trial {
    const BarrierFunction* rho;
    std::shared_ptr<const ConformalMap> f;
  };
  std::vector<Trial> trials;
  for (int i = 0; i < 8; ++i) {
    const Vec c = rng.unit_vec(3) * rng.uniform(0.0, 0.7);
    const std::vector<Vec> plane = orthonormalize(std::vector<Vec>{rng.normal_vec(3), rng.normal_vec(3)});
    trials.push_back({&rho_ball, std::make_shared<AffineDisc>(
                                     AffineDisc::round(c, plane[0], plane[1], 0.999 * (1.0 - c.norm())))});
  }
  for (int i = 0; i < 4; ++i) {
    const Vec c{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-0.7, 0.7)};
    const double a = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 0.4);
    const double b = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 0.4);
    const std::vector<Vec> plane = orthonormalize(std::vector<Vec>{Vec{1.0, 0.0, a}, Vec{0.0, 1.0, b}});
    const double tilt = std::hypot(plane[0][2], plane[1][2]);
    const double radius = 0.98 * (1.0 - std::abs(c[2])) / tilt;
    trials.push_back({&rho_slab, std::make_shared<AffineDisc>(AffineDisc::round(c, plane[0], plane[1], radius))});
  }
  std::vector<std::shared_ptr<const ConformalMap>> patches;
  for (const std::string& name : weierstrass_names())
    patches.push_back(std::make_shared<WeierstrassMap>(weierstrass_entry(name)));
  patches.push_back(std::make_shared<HelicoidMap>());
  for (const auto& p : patches)
    for (int i = 0; i < 3; ++i) trials.push_back({&rho_ball, fit_in_unit_ball(p, rng)});

  const double tol = 1e-8;
  int entering = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    CompositionOptions opts;
    const ImplicitDomain& dom = t.rho->domain();
    opts.inside = [&dom](const Vec& x) { return dom.value(x) <= 0.0; };
    const SubharmonicityReport r =
        subharmonicity_sweep(*t.rho, *t.f, t.f->domain().lattice(15, 15), tol, opts, workers());
    out.records.push_back({"map/" + std::to_string(i) + "/" + t.f->name(), r.argmin_point, r.min_laplacian, -tol,
                           r.pass() && r.samples > 0});
    if (r.rho_max > t.rho->plateau_value() + 1e-12) ++entering;
  }
  out.records.push_back({"map_count", Vec(), static_cast<double>(trials.size()), 20, trials.size() >= 20});
  out.records.push_back({"maps_meeting_collar", Vec(), static_cast<double>(entering),
                         static_cast<double>(trials.size()), entering == static_cast<int>(trials.size())});

  // -|x|^2 along a unit-speed conformal disc has Laplacian -2 (|f_x|^2 + |f_y|^2) = -4.
  const LambdaField negative(
      3, [](const Vec& x) { return -x.norm2(); }, [](const Vec& x) { return -2.0 * x; },
      [](const Vec&) { return -2.0 * SymMatrix::identity(3); });
  const ConformalMap& f = *trials.front().f;
  const SubharmonicityReport r = subharmonicity_sweep(negative, f, f.domain().lattice(9, 9), tol, {}, workers());
  out.records.push_back({"negative_control_flagged", r.argmin_point, static_cast<double>(r.violations.size()), 0.0,
                         !r.pass()});
  out.records.push_back({"negative_control_value", r.argmin_point, r.min_laplacian, -4.0,
                         std::abs(r.min_laplacian + 4.0) <= 1e-9});
  out.note = std::to_string(trials.size()) + " maps";
  return out;
}

// Hilbert metric of the unit ball: |v| / 2 (1/a + 1/b), a and b the distances
// from p to the sphere along -v and +v.
double hilbert_ball(const Vec& p, const Vec& v) {
  const Vec u = v / v.norm();
  const double pu = p.dot(u), disc = std::sqrt(pu * pu + 1.0 - p.norm2());
  const double forward = -pu + disc, backward = pu + disc;
  return 0.5 * v.norm() * (1.0 / forward + 1.0 / backward);
}

// 7. The disc-search upper bound reproduces the Klein metric of the ball.
Outcome bck_reproduction(std::uint64_t seed) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  const auto ball = surface("sphere");
  DiscSearchSpec spec;
  spec.workers = workers();
  Worst above, below, formula;
  for (int i = 0; i < 100; ++i) {
    const Vec p = rng.unit_vec(3) * (0.9 * std::cbrt(rng.uniform()));
    const Vec v = rng.unit_vec(3) * rng.uniform(0.5, 2.0);
    const double oracle = hilbert_ball(p, v);
    const MetricEstimate e = metric_upper_bound(*ball, p, v, spec);
    const double rel = e.found ? e.bound / oracle - 1.0 : kInf;
    above.add(rel, p);
    below.add(oracle - e.bound, p);
    formula.add(std::abs(bck_metric(p, v) - oracle) / oracle, p);
  }
  const double secs = seconds_since(t0);
  out.records.push_back(at_most("relative_excess", above, 0.01));
  out.records.push_back(at_most("deficit", below, 1e-6));
  out.records.push_back(at_most("bck_formula", formula, 1e-12));
  out.extra_ok = secs <= 120.0;
  out.note = fmt("worst excess %.3g, ", above.value) + fmt("%.1fs", secs);
  return out;
}

// 8. The distance-chain bound between (0,0,0) and (1,0,0) degenerates.
Outcome omega_d_degeneration(std::uint64_t) {
  Outcome out;
  const Vec p{0.0, 0.0, 0.0}, q{1.0, 0.0, 0.0};
  const std::vector<std::pair<double, double>> holes{{0.5, 0.5}, {-0.5, 0.5}};
  const std::vector<OmegaD> domains{
      OmegaD([holes](double x, double y) { return !(x == holes[0].first && y == holes[0].second) &&
                                                  !(x == holes[1].first && y == holes[1].second); },
             "plane minus two points", holes),
      OmegaD([](double, double) { return true; }, "plane"),
  };
  for (const OmegaD& d : domains) {
    double prev = kInf, last = kInf;
    for (int k : {10, 100, 1000, 10000}) {
      const ChainBound b = omega_d_distance_chain(d, p, q, k);
      // Vertical discs of radius 1/2 and the horizontal disc of radius k.
      const double oracle = 2.0 * std::atanh((1.0 / k) / 0.5) + std::atanh(1.0 / k);
      const std::string tag = d.name() + "/k=" + std::to_string(k);
      out.records.push_back({tag + "/monotone", Vec{static_cast<double>(k)}, b.total, prev, b.total <= prev});
      out.records.push_back({tag + "/closed_form", Vec{static_cast<double>(k)}, std::abs(b.total - oracle), 1e-12,
                             std::abs(b.total - oracle) <= 1e-12});
      prev = last = b.total;
    }
    out.records.push_back({d.name() + "/below_0.01", Vec(), last, 0.01, last < 0.01});
  }
  return out;
}

int rank_oracle(std::vector<Vec> rows, int n) {
  int rank = 0;
  for (int col = 0; col < n && rank < static_cast<int>(rows.size()); ++col) {
    std::size_t piv = static_cast<std::size_t>(rank);
    for (std::size_t r = piv; r < rows.size(); ++r)
      if (std::abs(rows[r][col]) > std::abs(rows[piv][col])) piv = r;
    if (std::abs(rows[piv][col]) < 1e-12) continue;
    std::swap(rows[piv], rows[static_cast<std::size_t>(rank)]);
    for (std::size_t r = static_cast<std::size_t>(rank) + 1; r < rows.size(); ++r)
      rows[r] = rows[r] - (rows[r][col] / rows[static_cast<std::size_t>(rank)][col]) * rows[static_cast<std::size_t>(rank)];
    ++rank;
  }
  return rank;
}

// 9. A finite intersection of halfspaces contains a 2-plane iff rank <= n - 2.
Outcome convex_classifier(std::uint64_t seed) {
  Outcome out;
  struct Fixture {
    std::string name;
    std::vector<Vec> l;
    std::vector<double> c;
    Vec interior;
  };
  const std::vector<Fixture> fixtures{
      {"slab", {Vec{0, 0, 1}, Vec{0, 0, -1}}, {1, 1}, Vec{0, 0, 0}},
      {"wedge", {Vec{1, 0, 0}, Vec{0, 1, 0}}, {0, 0}, Vec{-1, -1, 0}},
      {"halfspace", {Vec{1, 1, 1}}, {0}, Vec{-1, 0, 0}},
      {"R3", {}, {}, Vec{0, 0, 0}},
      {"orthant", {Vec{1, 0, 0}, Vec{0, 1, 0}, Vec{0, 0, 1}}, {0, 0, 0}, Vec{-1, -1, -1}},
      {"R4 two halfspaces", {Vec{1, 0, 0, 0}, Vec{0, 1, 1, 0}}, {0, 2}, Vec{-1, 0, 0, 0}},
      {"R4 three halfspaces", {Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, Vec{1, 1, 0, 1}}, {1, 1, 1}, Vec{0, 0, 0, 0}},
      {"R4 slab", {Vec{1, 0, 0, 0}, Vec{-1, 0, 0, 0}}, {1, 1}, Vec{0, 0, 0, 0}},
  };
  for (const Fixture& f : fixtures) {
    Rng rng(seed);
    HalfspaceIntersection h{f.l, f.c};
    const int n = f.interior.size();
    const int rank = rank_oracle(f.l, n);
    const bool expected = rank <= n - 2;
    const ConvexClassification c = convex_contains_2plane(h, f.interior, rng, 10000, 1e6);
    out.records.push_back({f.name + "/rank", f.interior, static_cast<double>(c.rank), static_cast<double>(rank),
                           c.rank == rank});
    out.records.push_back({f.name + "/contains_2plane", f.interior, c.contains_2plane ? 1.0 : 0.0,
                           expected ? 1.0 : 0.0, c.contains_2plane == expected});
    if (expected) {
      out.records.push_back({f.name + "/plane_exhibited", f.interior, static_cast<double>(c.plane_checks), 0.0,
                             c.plane.has_value() && c.plane_checks > 0 && !c.complete_hyperbolic});
    } else {
      out.records.push_back({f.name + "/random_planes_exit", f.interior, static_cast<double>(c.trials_exited),
                             10000.0, c.trials == 10000 && c.trials_exited == c.trials});
      out.records.push_back({f.name + "/rank_certificate", f.interior, static_cast<double>(c.rank),
                             static_cast<double>(n - 2), c.rank > n - 2 && c.complete_hyperbolic});
    }
  }
  return out;
}

std::string serialize(int criterion, const Outcome& o) {
  Report r;
  r.config = Json::object();
  r.config["criterion"] = criterion;
  r.records = o.records;
  return emit(r, ReportFormat::json_lines);
}

std::string config_dir() { return MCX_CONFIG_DIR; }

std::string cli_report(const std::string& file, Analysis a, int nworkers) {
  std::ifstream in(config_dir() + "/" + file);
  std::stringstream s;
  s << in.rdbuf();
  return emit(run_analysis(a, parse_config(s.str()), nworkers), ReportFormat::json_lines);
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto selected = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  const std::uint64_t seed = 20240601;
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome(std::uint64_t)> run;
    bool repeat;  // cheap enough to run again for the determinism check
  };
  const std::vector<Criterion> criteria{
      {1, "distance-field fidelity", distance_fidelity, false},
      {2, "curvature transport", curvature_transport, false},
      {3, "curvature bounds at the estimated reach", curvature_bounds, true},
      {4, "barrier construction", barrier_construction, false},
      {5, "eigenvalue-list identity", eigen_list_identity, false},
      {6, "subharmonicity on conformal harmonic discs", subharmonicity, true},
      {7, "Klein metric reproduction", bck_reproduction, false},
      {8, "Omega_D degeneration", omega_d_degeneration, true},
      {9, "convex classifier", convex_classifier, true},
  };

  bool all = true;
  std::string report;
  std::map<int, std::string> first_bytes;
  auto print = [&](int id, const char* title, const Outcome& o, double secs) {
    std::size_t failed = 0;
    for (const CheckRecord& r : o.records) failed += r.pass ? 0 : 1;
    std::printf("criterion %2d %-45s %s  (%zu checks, %zu failed, %.1fs)%s%s\n", id, title, o.pass() ? "PASS" : "FAIL",
                o.records.size(), failed, secs, o.note.empty() ? "" : "  ", o.note.c_str());
    for (const CheckRecord& r : o.records)
      if (!r.pass) std::printf("    failed %s: value %.17g threshold %.17g\n", r.name.c_str(), r.value, r.threshold);
    std::fflush(stdout);
    all = all && o.pass();
  };

  for (const Criterion& c : criteria) {
    if (!selected(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(seed);
    } catch (const std::exception& e) {
      o.records.push_back({"exception", Vec(), 0.0, 0.0, false});
      o.note = e.what();
    }
    print(c.id, c.title, o, seconds_since(t0));
    const std::string bytes = serialize(c.id, o);
    report += bytes;
    if (c.repeat) first_bytes[c.id] = bytes;
  }

  // 10. Repeated runs with the same seed give byte-identical reports, also
  // through the command-line pipeline with different worker counts.
  if (selected(10)) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      for (const Criterion& c : criteria) {
        if (!c.repeat || !selected(c.id)) continue;
        const bool same = serialize(c.id, c.run(seed)) == first_bytes[c.id];
        o.records.push_back({"criterion " + std::to_string(c.id) + " repeated", Vec(), same ? 0.0 : 1.0, 0.0, same});
      }
      const std::vector<std::pair<std::string, Analysis>> fixtures{
          {"ball_barrier.json", Analysis::barrier},         {"slab_verify.json", Analysis::verify},
          {"catenoid_curvature.json", Analysis::curvature}, {"cylinder_reach.json", Analysis::reach},
          {"ball_subharmonicity.json", Analysis::subharmonicity}, {"ball_metric.json", Analysis::metric},
          {"omega_d.json", Analysis::omega_d},              {"wedge_classify.json", Analysis::convex_classify},
      };
      for (const auto& [file, a] : fixtures) {
        const std::string one = cli_report(file, a, 1);
        const bool same = one == cli_report(file, a, 1) && one == cli_report(file, a, 3);
        o.records.push_back({"cli " + file, Vec(), same ? 0.0 : 1.0, 0.0, same});
      }
    } catch (const std::exception& e) {
      o.records.push_back({"exception", Vec(), 0.0, 0.0, false});
      o.note = e.what();
    }
    print(10, "determinism", o, seconds_since(t0));
    report += serialize(10, o);
  }

  write_atomic("acceptance_report.jsonl", report);
  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
