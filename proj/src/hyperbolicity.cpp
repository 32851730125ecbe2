#include "mcx/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mcx/mpsh.hpp"
#include "mcx/parallel.hpp"

namespace mcx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

// Minimizes f on [a, b] by golden-section search; returns (argmin, min).
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int iterations, double x_best, double f_best) {
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
    if (fc < f_best) f_best = fc, x_best = c;
    if (fd < f_best) f_best = fd, x_best = d;
  }
  return {x_best, f_best};
}

class DiscSearch {
 public:
  DiscSearch(const ImplicitDomain& d, const Vec& p, const Vec& v, const DiscSearchSpec& s)
      : d_(d), p_(p), vnorm_(v.norm()), s_(s), scale_(d.length_scale()) {
    e1_ = v / vnorm_;
    const std::vector<Vec> comp = orthonormal_complement(e1_);
    b1_ = comp[0];
    if (comp.size() > 1) b2_ = comp[1];
  }

  bool inside(const Vec& x) const { return d_.value(x) <= -s_.margin; }

  Vec e2(double theta) const { return b2_.size() ? std::cos(theta) * b1_ + std::sin(theta) * b2_ : b1_; }

  // Largest t with c + t u inside, bracketing from `guess`.
  double exit_radius(const Vec& c, const Vec& u, double guess) const {
    const double tmax = s_.max_radius * scale_;
    double lo = 0.0, hi = std::min(std::max(guess, 1e-6 * scale_), tmax);
    if (inside(c + hi * u)) {
      lo = hi;
      for (;;) {
        if (hi >= tmax) return tmax;
        hi = std::min(2.0 * hi, tmax);
        if (!inside(c + hi * u)) break;
        lo = hi;
      }
    } else {
      for (;;) {
        const double t = 0.5 * hi;
        if (t < 1e-12 * scale_) return 0.0;
        if (inside(c + t * u)) {
          lo = t;
          break;
        }
        hi = t;
      }
    }
    for (int i = 0; i < s_.ray_bisections; ++i) {
      const double mid = 0.5 * (lo + hi);
      (inside(c + mid * u) ? lo : hi) = mid;
    }
    return lo;
  }

  struct Radius {
    double min = 0.0;
    double max = 0.0;
  };

  // Largest disc radius around c in the plane (e1, e2) and the farthest ray exit.
  Radius max_radius(const Vec& c, const Vec& e2, double guess) const {
    if (!inside(c)) return {};
    const int nr = s_.rays;
    std::vector<double> r(static_cast<std::size_t>(nr));
    auto dir = [&](double a) { return std::cos(a) * e1_ + std::sin(a) * e2; };
    Radius out{kInf, 0.0};
    int jmin = 0;
    for (int j = 0; j < nr; ++j) {
      const double a = 2.0 * M_PI * j / nr;
      r[static_cast<std::size_t>(j)] = exit_radius(c, dir(a), guess);
      if (r[static_cast<std::size_t>(j)] < out.min) out.min = r[static_cast<std::size_t>(j)], jmin = j;
      out.max = std::max(out.max, r[static_cast<std::size_t>(j)]);
    }
    if (out.min <= 0.0) return {0.0, out.max};
    const double h = 2.0 * M_PI / nr;
    const double a0 = 2.0 * M_PI * jmin / nr;
    const double g = out.min;
    auto f = [&](double a) { return exit_radius(c, dir(a), g); };
    out.min = golden_min(f, a0 - h, a0 + h, s_.golden_iterations, a0, out.min).second;
    return out;
  }

  double bound(double radius, double offset2) const {
    const double den = radius * radius - offset2;
    return den > 0.0 ? vnorm_ * radius / den : kInf;
  }

  struct Candidate {
    double bound = kInf;
    double theta = 0.0;
    double o1 = 0.0, o2 = 0.0;
    double radius = 0.0;
  };

  Vec center(const Vec& e2, double o1, double o2) const { return p_ - o1 * e1_ - o2 * e2; }

  Candidate best_offset(double theta) const {
    const Vec f2 = e2(theta);
    Candidate best;
    best.theta = theta;
    const Radius r0 = max_radius(p_, f2, scale_);
    if (r0.min <= 0.0) return best;
    auto eval = [&](double o1, double o2) {
      const Radius r = max_radius(center(f2, o1, o2), f2, r0.min);
      return std::pair{bound(r.min, o1 * o1 + o2 * o2), r.min};
    };
    best.bound = bound(r0.min, 0.0);
    best.radius = r0.min;
    const double ext = std::min(r0.max, s_.max_radius * scale_);
    const int g = std::max(s_.offset_grid, 2);
    double step = 2.0 * ext / (g - 1);
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        const double o1 = -ext + step * i, o2 = -ext + step * j;
        const auto [b, rad] = eval(o1, o2);
        if (b < best.bound) best.bound = b, best.o1 = o1, best.o2 = o2, best.radius = rad;
      }
    }
    for (int round = 0; round < s_.offset_rounds; ++round) {
      for (int axis = 0; axis < 2; ++axis) {
        const double x0 = axis == 0 ? best.o1 : best.o2;
        auto f = [&](double x) { return axis == 0 ? eval(x, best.o2).first : eval(best.o1, x).first; };
        const auto [x, b] = golden_min(f, x0 - step, x0 + step, s_.golden_iterations, x0, best.bound);
        if (b < best.bound) {
          (axis == 0 ? best.o1 : best.o2) = x;
          best.bound = b;
          best.radius = eval(best.o1, best.o2).second;
        }
      }
      step *= 0.25;
    }
    return best;
  }

  // Lattice plus boundary circle, all strictly inside with the margin.
  std::size_t certify(const Vec& c, const Vec& f2, double radius) const {
    std::size_t count = 0;
    auto at = [&](double t, double a) { return c + t * (std::cos(a) * e1_ + std::sin(a) * f2); };
    if (!inside(c)) return 0;
    ++count;
    for (int i = 1; i <= s_.lattice_radii; ++i) {
      for (int j = 0; j < s_.lattice_angles; ++j) {
        if (!inside(at(radius * i / s_.lattice_radii, 2.0 * M_PI * j / s_.lattice_angles))) return 0;
        ++count;
      }
    }
    for (int j = 0; j < s_.circle_samples; ++j) {
      if (!inside(at(radius, 2.0 * M_PI * (j + 0.5) / s_.circle_samples))) return 0;
      ++count;
    }
    return count;
  }

  const Vec& e1() const { return e1_; }
  bool has_orientation() const { return b2_.size() > 0; }

 private:
  const ImplicitDomain& d_;
  Vec p_;
  double vnorm_;
  DiscSearchSpec s_;
  double scale_;
  Vec e1_, b1_, b2_;
};

}  // namespace

MetricEstimate metric_upper_bound(const ImplicitDomain& domain, const Vec& p, const Vec& v, const DiscSearchSpec& spec) {
  const int n = domain.dim();
  if (p.size() != n || v.size() != n) throw PreconditionError("metric_upper_bound: dimension mismatch");
  if (n < 2) throw PreconditionError("metric_upper_bound needs dimension at least 2");
  if (!(v.norm() > 0.0) || !v.all_finite()) throw PreconditionError("metric_upper_bound: v must be nonzero", v.to_vector());
  if (!(domain.value(p) < 0.0)) throw PreconditionError("metric_upper_bound: p is not in the domain " + format_vec(p), p.to_vector());

  const DiscSearch search(domain, p, v, spec);
  MetricEstimate est;
  est.p = p;
  est.v = v;
  est.qualifier = domain.name() == "sphere" ? "upper bound; the exact value is bck_metric" : "upper bound only";

  using Candidate = DiscSearch::Candidate;
  Candidate best;
  if (search.has_orientation()) {
    const int k = std::max(spec.orientations, 1);
    std::vector<Candidate> coarse(static_cast<std::size_t>(k));
    parallel_for(coarse.size(), spec.workers,
                 [&](std::size_t i) { coarse[i] = search.best_offset(M_PI * static_cast<double>(i) / k); });
    for (const Candidate& c : coarse)
      if (c.bound < best.bound) best = c;
    if (std::isfinite(best.bound)) {
      const double h = M_PI / k;
      const int iters = std::max(
          0, static_cast<int>(std::ceil(std::log(spec.orientation_tol / (2.0 * h)) / std::log(kGolden))));
      Candidate refined = best;
      auto f = [&](double theta) {
        const Candidate c = search.best_offset(theta);
        if (c.bound < refined.bound) refined = c;
        return c.bound;
      };
      golden_min(f, best.theta - h, best.theta + h, iters, best.theta, best.bound);
      best = refined;
    }
  } else {
    best = search.best_offset(0.0);
  }

  if (!std::isfinite(best.bound)) {
    est.diagnostic = "no admissible disc: p is within the margin of the boundary in every searched plane";
    return est;
  }
  const Vec f2 = search.e2(best.theta);
  const Vec c = search.center(f2, best.o1, best.o2);
  const double off2 = best.o1 * best.o1 + best.o2 * best.o2;
  double radius = best.radius;
  std::size_t certified = search.certify(c, f2, radius);
  for (double shrink = 1e-9; certified == 0 && shrink < 1.0; shrink *= 4.0) {
    radius = best.radius * (1.0 - shrink);
    if (radius * radius <= off2) break;
    certified = search.certify(c, f2, radius);
  }
  if (certified == 0) {
    est.diagnostic = "best disc failed lattice certification";
    return est;
  }
  est.found = true;
  est.bound = search.bound(radius, off2);
  est.e1 = search.e1();
  est.e2 = f2;
  est.center = c;
  est.radius = radius;
  est.offset = p - c;
  est.certified_samples = certified;
  return est;
}

double bck_metric(const Vec& p, const Vec& v) {
  if (p.size() != v.size()) throw PreconditionError("bck_metric: dimension mismatch");
  const double s = 1.0 - p.norm2();
  if (!(s > 0.0)) throw PreconditionError("bck_metric: |p| must be below 1", p.to_vector());
  const double pv = p.dot(v);
  return std::sqrt(v.norm2() / s + pv * pv / (s * s));
}

double poincare_distance(double x1, double y1, double x2, double y2) {
  const std::complex<double> w1(x1, y1), w2(x2, y2);
  if (!(std::abs(w1) < 1.0 && std::abs(w2) < 1.0))
    throw PreconditionError("poincare_distance: points must lie in the unit disc", {x1, y1, x2, y2});
  return std::atanh(std::abs(w1 - w2) / std::abs(1.0 - std::conj(w1) * w2));
}

OmegaD::OmegaD(std::function<bool(double, double)> slice, std::string name,
               std::vector<std::pair<double, double>> omitted)
    : slice_(std::move(slice)), name_(std::move(name)), omitted_(std::move(omitted)) {
  if (!slice_) throw PreconditionError("OmegaD needs a slice predicate");
}

bool OmegaD::contains(const Vec& x) const {
  if (x.size() != 3) throw PreconditionError("OmegaD lives in R^3");
  const double z = x[2];
  if (!(std::abs(z) < 1.0)) return false;
  if (!(z * z * (x[0] * x[0] + x[1] * x[1]) < 1.0)) return false;
  if (z == 0.0) return slice_(x[0], x[1]);
  return true;
}

bool omega_d_membership(const OmegaD& dom, const Vec& x) { return dom.contains(x); }

namespace {

// Vertical disc {p + r (s e + t e3)} inside Omega_D for some horizontal e.
bool vertical_disc_fits(const OmegaD& dom, const Vec& p, double r, const ChainSpec& s) {
  for (int a = 0; a < 4; ++a) {
    const double ang = M_PI * a / 4.0;
    const Vec e{std::cos(ang), std::sin(ang), 0.0};
    bool ok = true;
    for (int i = 0; ok && i < s.diameter_samples; ++i) {
      const double t = -1.0 + 2.0 * i / (s.diameter_samples - 1);
      Vec x = p + (r * t) * e;
      x[2] = 0.0;
      ok = dom.contains(x);
    }
    for (int i = 1; ok && i <= s.lattice_radii; ++i) {
      for (int j = 0; ok && j < s.lattice_angles; ++j) {
        const double rr = r * i / s.lattice_radii, an = 2.0 * M_PI * j / s.lattice_angles;
        ok = dom.contains(p + (rr * std::cos(an)) * e + Vec{0.0, 0.0, rr * std::sin(an)});
      }
    }
    if (ok) return true;
  }
  return false;
}

double vertical_radius(const OmegaD& dom, const Vec& p, const ChainSpec& s) {
  for (double r = s.vertical_radius; r >= s.min_radius; r *= 0.5)
    if (vertical_disc_fits(dom, p, r, s)) return r;
  throw PreconditionError("no vertical disc of radius >= " + std::to_string(s.min_radius) + " fits at " +
                              format_vec(p) + " in Omega_" + dom.name(),
                          p.to_vector());
}

}  // namespace

ChainBound omega_d_distance_chain(const OmegaD& dom, const Vec& p, const Vec& q, int k, const ChainSpec& spec) {
  if (k < 2) throw PreconditionError("distance chain needs k >= 2", {double(k)});
  for (const Vec* x : {&p, &q}) {
    if (x->size() != 3 || (*x)[2] != 0.0 || !dom.contains(*x))
      throw PreconditionError("distance chain endpoints must lie in D x {0}: " + format_vec(*x), x->to_vector());
  }
  ChainBound b;
  b.k = k;
  if (p == q) return b;
  const double h = 1.0 / k;
  b.radius_p = vertical_radius(dom, p, spec);
  b.radius_q = vertical_radius(dom, q, spec);
  for (double r : {b.radius_p, b.radius_q})
    if (!(h < r))
      throw PreconditionError("height 1/k = " + std::to_string(h) + " exceeds the vertical disc radius", {h, r});
  b.vertical_p = std::atanh(h / b.radius_p);
  b.vertical_q = std::atanh(h / b.radius_q);
  b.horizontal = poincare_distance(p[0] / k, p[1] / k, q[0] / k, q[1] / k);
  b.total = b.vertical_p + b.horizontal + b.vertical_q;
  return b;
}

int HalfspaceIntersection::dim() const { return functionals.empty() ? 0 : functionals.front().size(); }

bool HalfspaceIntersection::contains(const Vec& x) const { return slack(x) > 0.0; }

double HalfspaceIntersection::slack(const Vec& x) const {
  double s = kInf;
  for (std::size_t j = 0; j < functionals.size(); ++j) s = std::min(s, bounds[j] - functionals[j].dot(x));
  return s;
}

ConvexClassification convex_contains_2plane(const HalfspaceIntersection& h, const Vec& interior, Rng& rng, int trials,
                                            double trial_radius) {
  const int n = interior.size();
  if (n < 2) throw PreconditionError("convex classifier needs dimension at least 2");
  if (h.functionals.size() != h.bounds.size()) throw PreconditionError("functionals and bounds differ in number");
  for (std::size_t j = 0; j < h.functionals.size(); ++j) {
    if (h.functionals[j].size() != n) throw PreconditionError("functional dimension mismatch", {double(j)});
    if (!(h.functionals[j].norm() > 0.0)) throw PreconditionError("functional " + std::to_string(j) + " vanishes", {double(j)});
  }
  if (!h.contains(interior))
    throw PreconditionError("supplied point is not strictly inside the intersection", interior.to_vector());

  ConvexClassification out;
  out.n = n;
  out.base = interior;
  out.trial_radius = trial_radius;
  SymMatrix gram(n);
  for (const Vec& l : h.functionals) gram.add_outer(l);
  const EigenDecomposition eig = sym_eigen(gram);
  out.gram_eigenvalues = eig.values;
  const double top = std::max(1.0, eig.values.back());
  int null_dim = 0;
  for (double lam : eig.values)
    if (lam <= 1e-10 * top) ++null_dim;
  out.rank = n - null_dim;

  if (out.rank <= n - 2) {
    const Vec u = eig.vectors[0], w = eig.vectors[1];
    bool ok = true;
    const int g = 21;
    for (int i = 0; i < g && ok; ++i) {
      for (int j = 0; j < g && ok; ++j) {
        const double s = trial_radius * (-1.0 + 2.0 * i / (g - 1)), t = trial_radius * (-1.0 + 2.0 * j / (g - 1));
        ok = h.contains(interior + s * u + t * w);
        ++out.plane_checks;
      }
    }
    if (ok) out.plane = std::pair{u, w};
  }
  out.contains_2plane = out.plane.has_value();

  for (int t = 0; t < trials; ++t) {
    const MPlane plane = random_plane(n, 2, rng);
    const Vec& u = plane.basis()[0];
    const Vec& w = plane.basis()[1];
    double exit = kInf;
    Vec dir;
    for (std::size_t j = 0; j < h.functionals.size(); ++j) {
      const Vec& l = h.functionals[j];
      const Vec proj = l.dot(u) * u + l.dot(w) * w;
      const double len = proj.norm();
      if (!(len > 0.0)) continue;
      const double r = (h.bounds[j] - l.dot(interior)) / len;
      if (r < exit) exit = r, dir = proj / len;
    }
    ++out.trials;
    if (std::isfinite(exit) && exit <= trial_radius && !h.contains(interior + (exit * (1.0 + 1e-9) + 1e-12) * dir)) {
      ++out.trials_exited;
      out.max_exit_radius = std::max(out.max_exit_radius, exit);
    }
  }
  out.complete_hyperbolic = !out.contains_2plane;
  return out;
}

}  // namespace mcx
