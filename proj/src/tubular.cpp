#include "mcx/tubular.hpp"

#include <algorithm>
#include <cmath>

#include "mcx/parallel.hpp"

namespace mcx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  Vec y;
  double dist = kInf;
  double residual = kInf;
  bool converged = false;
};

// Newton steps along grad phi until |phi| / |grad phi| is negligible.
bool onto_surface(const ImplicitDomain& d, Vec& y, double scale) {
  for (int k = 0; k < 60; ++k) {
    const double phi = d.value(y);
    const Vec g = d.gradient(y);
    const double gn2 = g.norm2();
    if (!std::isfinite(phi) || !(gn2 > 1e-16)) return false;
    Vec step = (phi / gn2) * g;
    const double len = step.norm();
    if (len > scale) step *= scale / len;
    y -= step;
    if (len <= 1e-15 * scale) return true;
  }
  const Vec g = d.gradient(y);
  return std::abs(d.value(y)) / g.norm() <= 1e-12 * scale;
}

// Component of (x - y) tangent to the level set through y.
Vec tangential(const Vec& r, const Vec& g) {
  const Vec n = g / g.norm();
  return r - r.dot(n) * n;
}

Candidate project_from(const ImplicitDomain& d, const Vec& x, Vec y, const ProjectionSettings& s, double scale) {
  Candidate c;
  if (!onto_surface(d, y, scale)) return c;

  // Projected descent with backtracking.
  double dist = distance(x, y);
  for (int it = 0; it < s.max_descent; ++it) {
    const Vec g = d.gradient(y);
    const Vec t = tangential(x - y, g);
    if (t.norm() <= 1e-12 * (dist + scale)) break;
    // Parabolic fit of the squared distance through steps 0, 1/2, 1, then halving.
    auto try_step = [&](double step, Vec& out) {
      out = y + step * t;
      return onto_surface(d, out, scale) ? distance(x, out) : kInf;
    };
    Vec best_y = y, trial;
    double best_d = dist;
    const double f0 = dist * dist;
    const double d1 = try_step(1.0, trial);
    if (d1 < best_d) best_d = d1, best_y = trial;
    const double dh = try_step(0.5, trial);
    if (dh < best_d) best_d = dh, best_y = trial;
    if (std::isfinite(d1) && std::isfinite(dh)) {
      const double f1 = d1 * d1, fh = dh * dh;
      const double curv = 4.0 * (f1 - 2.0 * fh + f0);
      if (curv > 0.0) {
        const double slope = 4.0 * fh - 3.0 * f0 - f1;
        const double sv = std::clamp(-slope / curv, 0.01, 4.0);
        const double dv = try_step(sv, trial);
        if (dv < best_d) best_d = dv, best_y = trial;
      }
    }
    for (double step = 0.25; best_d >= dist && step > 1e-9; step *= 0.5) {
      const double ds = try_step(step, trial);
      if (ds < best_d) best_d = ds, best_y = trial;
    }
    const bool moved = best_d < dist;
    if (moved) y = best_y, dist = best_d;
    if (!moved) break;
  }

  // Newton on the Lagrange system y - x + lambda grad phi(y) = 0, phi(y) = 0.
  const int n = x.size();
  const int m = n + 1;
  Vec best = y;
  double lambda;
  {
    const Vec g = d.gradient(y);
    lambda = (x - y).dot(g) / g.norm2();
  }
  for (int it = 0; it < s.max_newton; ++it) {
    const Vec g = d.gradient(y);
    const SymMatrix h = d.hessian(y);
    std::vector<double> jac(static_cast<std::size_t>(m * m), 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) jac[static_cast<std::size_t>(i * m + j)] = (i == j ? 1.0 : 0.0) + lambda * h(i, j);
      jac[static_cast<std::size_t>(i * m + n)] = g[i];
      jac[static_cast<std::size_t>(n * m + i)] = g[i];
      rhs[static_cast<std::size_t>(i)] = -(y[i] - x[i] + lambda * g[i]);
    }
    rhs[static_cast<std::size_t>(n)] = -d.value(y);
    if (!solve_dense(jac, rhs, m)) break;
    Vec dy(n);
    for (int i = 0; i < n; ++i) dy[i] = rhs[static_cast<std::size_t>(i)];
    if (!dy.all_finite() || dy.norm() > 0.5 * scale) break;
    y += dy;
    lambda += rhs[static_cast<std::size_t>(n)];
    if (dy.norm() <= s.tol * scale) break;
  }
  // Keep the polished point only if it stayed on M and did not drift to a worse critical point.
  if (!y.all_finite() || distance(x, y) > distance(x, best) + 1e-12 * scale) {
    y = best;
  } else {
    const Vec g = d.gradient(y);
    if (!(std::abs(d.value(y)) <= s.tol * scale * g.norm())) y = best;
  }

  const Vec g = d.gradient(y);
  const double gn = g.norm();
  if (!(gn > 1e-12)) return c;
  c.y = y;
  c.dist = distance(x, y);
  c.residual = std::abs(d.value(y)) / gn;
  const double tang = tangential(x - y, g).norm();
  c.converged = c.residual <= s.tol * scale && tang <= 1e-7 * (c.dist + scale);
  return c;
}

}  // namespace

ProjectionResult signed_distance(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& s) {
  if (x.size() != domain.dim() || !x.all_finite())
    throw PreconditionError("signed_distance: invalid query point " + format_vec(x), x.to_vector());
  const double scale = domain.length_scale();
  const double phi_x = domain.value(x);
  if (phi_x == 0.0) {
    ProjectionResult r;
    r.foot = x;
    r.delta = 0.0;
    r.feet = {x};
    return r;
  }

  std::vector<Vec> starts{x};
  for (Vec& q : domain.boundary_seeds(x, std::max(s.starts - 1, 0))) starts.push_back(std::move(q));

  std::vector<Candidate> cands;
  cands.reserve(starts.size());
  for (const Vec& st : starts) cands.push_back(project_from(domain, x, st, s, scale));

  const Candidate* best = nullptr;
  const Candidate* best_any = nullptr;
  for (const Candidate& c : cands) {
    if (!c.y.size()) continue;
    if (!best_any || c.dist < best_any->dist) best_any = &c;
    if (c.converged && (!best || c.dist < best->dist)) best = &c;
  }
  if (!best) {
    if (best_any)
      throw ProjectionError("nearest-point projection did not converge for x = " + format_vec(x),
                            best_any->y.to_vector(), best_any->residual);
    throw ProjectionError("nearest-point projection found no admissible start for x = " + format_vec(x),
                          x.to_vector(), kInf);
  }

  ProjectionResult r;
  r.foot = best->y;
  r.residual = best->residual;
  r.delta = (phi_x < 0.0 ? -1.0 : 1.0) * best->dist;
  r.feet.push_back(best->y);
  const double tie = 1e-9 * (scale + best->dist);
  const double sep = s.separation * scale;
  for (const Candidate& c : cands) {
    if (!c.converged || c.dist > best->dist + tie) continue;
    bool fresh = true;
    for (const Vec& f : r.feet)
      if (distance(f, c.y) <= sep) fresh = false;
    if (fresh) r.feet.push_back(c.y);
  }
  r.multiplicity = static_cast<int>(r.feet.size());
  return r;
}

std::vector<double> transport_curvatures(const SurfacePoint& sp, double t) {
  std::vector<double> out;
  out.reserve(sp.curvatures.size());
  for (double nu : sp.curvatures) {
    const double den = 1.0 + t * nu;
    if (!(den > 0.0)) {
      throw FocalPointError("focal point: 1 + t*nu = " + std::to_string(den) + " (t = " + std::to_string(t) +
                                ", nu = " + std::to_string(nu) + ")",
                            sp.position.to_vector());
    }
    out.push_back(nu / den);
  }
  return out;
}

DistanceJet distance_jet(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& settings) {
  return distance_jet(domain, signed_distance(domain, x, settings));
}

DistanceJet distance_jet(const ImplicitDomain& domain, ProjectionResult projection) {
  DistanceJet j;
  j.projection = std::move(projection);
  if (j.projection.multiplicity > 1) {
    const Vec& f = j.projection.foot;
    throw NonUniqueFootError("nearest point is not unique (" + std::to_string(j.projection.multiplicity) +
                                 " feet, delta = " + std::to_string(j.projection.delta) + ", foot " + format_vec(f) + ")",
                             f.to_vector());
  }
  j.foot = principal_curvatures(domain, j.projection.foot);
  j.gradient = -j.foot.inner_normal;
  j.transported = transport_curvatures(j.foot, j.projection.delta);
  j.hessian = SymMatrix::from_spectrum(j.transported, j.foot.directions);
  return j;
}

Vec grad_delta(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& settings) {
  const ProjectionResult p = signed_distance(domain, x, settings);
  if (p.multiplicity > 1)
    throw NonUniqueFootError("nearest point is not unique at " + format_vec(x), x.to_vector());
  return domain.gradient(p.foot).normalized();
}

SymMatrix hessian_delta(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& settings) {
  return distance_jet(domain, x, settings).hessian;
}

void TubularCollar::validate() const {
  auto fail = [&](const std::string& what) {
    throw PreconditionError("collar radii: " + what, {reach, eps0p, eps0, eps2, eps1});
  };
  if (!(reach > 0.0)) fail("reach must be positive");
  if (!(eps1 > 0.0)) fail("eps1 must be positive");
  if (!(eps1 < eps2)) fail("eps1 < eps2 violated");
  if (!(eps2 < eps0)) fail("eps2 < eps0 violated");
  if (!(eps0 < eps0p)) fail("eps0 < eps0' violated");
  if (!(eps0p < 0.5 * reach)) fail("eps0' < reach/2 violated");
}

namespace {

struct RayProbe {
  double t = kInf;
  Vec at;
};

// First t in (0, length] where the foot of p + t*dir stops being p.
RayProbe probe_ray(const ImplicitDomain& d, const Vec& p, const Vec& dir, const ReachSettings& s) {
  const double scale = d.length_scale();
  const double length = s.probe_length * scale;
  const double thr = s.switch_tol * scale;
  auto switched = [&](double t) {
    const Vec x = p + t * dir;
    try {
      const ProjectionResult r = signed_distance(d, x, s.projection);
      return r.multiplicity > 1 || distance(r.foot, p) > thr;
    } catch (const ProjectionError&) {
      return true;
    }
  };
  double lo = 0.0, hi = kInf;
  for (int k = 1; k <= s.march_steps; ++k) {
    const double t = length * k / s.march_steps;
    if (switched(t)) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (!std::isfinite(hi)) return {};
  for (int k = 0; k < s.bisection_steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (switched(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {lo, p + lo * dir};
}

}  // namespace

ReachEstimate reach_estimate(const ImplicitDomain& domain, std::span<const Vec> samples, const ReachSettings& s) {
  if (samples.empty()) throw PreconditionError("reach_estimate: empty sample set");
  ReachEstimate r;
  r.samples = samples.size();

  double max_curv = 0.0;
  std::vector<SurfacePoint> points;
  points.reserve(samples.size());
  for (const Vec& p : samples) {
    points.push_back(principal_curvatures(domain, p));
    for (double nu : points.back().curvatures) {
      if (std::abs(nu) > max_curv) {
        max_curv = std::abs(nu);
        r.focal_witness = p;
      }
    }
  }
  r.focal_bound = max_curv > 0.0 ? 1.0 / max_curv : kInf;
  if (r.focal_witness.size() == 0) r.focal_witness = samples.front();

  // Probe an evenly spread subset, always in sample order.
  const std::size_t probes = std::min<std::size_t>(samples.size(), static_cast<std::size_t>(std::max(s.probe_count, 0)));
  std::vector<RayProbe> results(2 * probes);
  parallel_for(2 * probes, s.workers, [&](std::size_t i) {
    const std::size_t k = (i / 2) * samples.size() / probes;
    const Vec dir = (i % 2 == 0 ? 1.0 : -1.0) * points[k].inner_normal;
    results[i] = probe_ray(domain, samples[k], dir, s);
  });
  for (const RayProbe& rp : results) {
    if (rp.t < r.probe_bound) {
      r.probe_bound = rp.t;
      r.probe_witness = rp.at;
    }
  }
  r.value = std::min(r.focal_bound, r.probe_bound);

  Vec lo = samples.front(), hi = samples.front();
  for (const Vec& p : samples)
    for (int i = 0; i < p.size(); ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  r.qualifier = "sampled region " + format_vec(lo) + " .. " + format_vec(hi) + ", " + std::to_string(samples.size()) +
                " samples, " + std::to_string(probes) + " probed";
  return r;
}

CurvatureBoundsReport curvature_bounds_check(const ImplicitDomain& domain, double epsilon, int m,
                                             std::span<const Vec> samples) {
  if (!(epsilon > 0.0)) throw PreconditionError("curvature_bounds_check: epsilon must be positive");
  if (m < 1 || m > domain.dim() - 1) throw PreconditionError("curvature_bounds_check: m out of range");
  if (samples.empty()) throw PreconditionError("curvature_bounds_check: empty sample set");
  CurvatureBoundsReport r;
  r.epsilon = epsilon;
  r.m = m;
  const double upper = 1.0 / epsilon;
  const double lower = -(m - 1) / epsilon;
  r.tolerance = 1e-12 * (1.0 + upper);
  for (const Vec& p : samples) {
    const SurfacePoint sp = principal_curvatures(domain, p);
    ++r.checked;
    double negative = 0.0;
    for (double nu : sp.curvatures) {
      r.upper_margin = std::min(r.upper_margin, upper - nu);
      r.lower_margin = std::min(r.lower_margin, nu - lower);
      if (nu > upper + r.tolerance) r.violations.push_back({p, nu, upper, "upper"});
      if (nu < lower - r.tolerance) r.violations.push_back({p, nu, lower, "lower"});
      if (nu <= 0.0) negative += nu;
    }
    r.negative_part_margin = std::min(r.negative_part_margin, negative - lower);
    if (negative < lower - r.tolerance) r.violations.push_back({p, negative, lower, "negative-part"});
  }
  return r;
}

}  // namespace mcx
