#include "mcx/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcx {

bool Box::contains(const Vec& x) const noexcept {
  for (int i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

Box Box::cube(int n, double half_width) { return Box{Vec(n, -half_width), Vec(n, half_width)}; }

std::vector<Vec> ImplicitDomain::boundary_seeds(const Vec&, int) const { return {}; }

std::vector<Vec> ImplicitDomain::sample_boundary(const Box&, int, Rng&) const {
  throw PreconditionError("domain '" + name() + "' has no boundary sampler");
}

Box ImplicitDomain::default_region() const { return Box::cube(dim(), 2.0 * length_scale()); }

double check_regular(const ImplicitDomain& domain, std::span<const Vec> boundary_samples) {
  double smallest = std::numeric_limits<double>::infinity();
  for (const Vec& p : boundary_samples) {
    const double g = domain.gradient(p).norm();
    if (!(g >= 1e-8)) {
      throw SingularPointError("grad phi vanishes on the boundary: |grad phi| = " + std::to_string(g) + " at " +
                                   format_vec(p),
                               p.to_vector());
    }
    smallest = std::min(smallest, g);
  }
  return smallest;
}

SurfacePoint principal_curvatures(const ImplicitDomain& domain, const Vec& p, double boundary_tol) {
  const double phi = domain.value(p);
  const Vec grad = domain.gradient(p);
  const double gnorm = grad.norm();
  if (!(gnorm >= 1e-8)) {
    throw SingularPointError("singular boundary point: |grad phi| = " + std::to_string(gnorm) + " at " +
                                 format_vec(p),
                             p.to_vector());
  }
  // Residual measured in length units so the check does not depend on how phi is scaled.
  if (std::abs(phi) / gnorm > boundary_tol * domain.length_scale()) {
    throw NotOnBoundaryError("point is not on the boundary: |phi| = " + std::to_string(std::abs(phi)) + " at " +
                                 format_vec(p),
                             std::abs(phi), p.to_vector());
  }
  const Vec outward = grad / gnorm;
  const SymMatrix hess = domain.hessian(p);
  const std::vector<Vec> frame = orthonormal_complement(outward);
  const int k = static_cast<int>(frame.size());

  // Hess delta(p) on T_pM equals P Hess(phi) P / |grad phi|; its eigenvalues are
  // the inner-side curvatures (positive on a ball).
  SymMatrix shape(k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) shape.set(i, j, hess.quadratic(frame[i], frame[j]) / gnorm);
  const EigenDecomposition eig = sym_eigen(shape);

  SurfacePoint sp;
  sp.position = p;
  sp.inner_normal = -outward;
  sp.curvatures = eig.values;
  sp.directions.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    Vec d(p.size());
    for (int i = 0; i < k; ++i) d += eig.vectors[j][i] * frame[i];
    sp.directions.push_back(d);
  }
  return sp;
}

SurfacePoint parametric_curvatures(const SurfaceJet& jet, const std::optional<Vec>& inner_hint) {
  Vec normal = cross(jet.xu, jet.xv);
  const double area = normal.norm();
  if (!(area > 1e-14)) throw SingularPointError("parametrization is not immersive at " + format_vec(jet.x), jet.x.to_vector());
  normal /= area;
  if (inner_hint && normal.dot(*inner_hint) < 0.0) normal *= -1.0;

  const double E = jet.xu.dot(jet.xu), F = jet.xu.dot(jet.xv), G = jet.xv.dot(jet.xv);
  const double L = jet.xuu.dot(normal), M = jet.xuv.dot(normal), N = jet.xvv.dot(normal);
  const double det = E * G - F * F;
  const double mean = (E * N + G * L - 2.0 * F * M) / (2.0 * det);
  const double gauss = (L * N - M * M) / det;
  const double disc = std::sqrt(std::max(0.0, mean * mean - gauss));
  const double k1 = mean - disc;
  const double k2 = mean + disc;

  // Principal direction for k1 in parameter coordinates: null vector of II - k1 I.
  const double a = L - k1 * E, b = M - k1 * F, c = N - k1 * G;
  double wu = -b, wv = a;
  if (std::hypot(c, b) > std::hypot(a, b)) {
    wu = c;
    wv = -b;
  }
  Vec d1 = wu * jet.xu + wv * jet.xv;
  if (d1.norm() < 1e-12 * std::sqrt(E + G) || disc <= 1e-12 * (1.0 + std::abs(mean))) {
    d1 = jet.xu;  // umbilic: any tangent frame diagonalizes the shape operator
  }
  d1 = d1.normalized();
  const Vec d2 = cross(normal, d1).normalized();

  SurfacePoint sp;
  sp.position = jet.x;
  sp.inner_normal = normal;
  sp.curvatures = {k1, k2};
  sp.directions = {d1, d2};
  return sp;
}

namespace {

void check_m(const SurfacePoint& sp, int m) {
  const int k = static_cast<int>(sp.curvatures.size());
  if (m < 1 || m > k) {
    throw PreconditionError("m = " + std::to_string(m) + " out of range [1, " + std::to_string(k) + "]");
  }
}

}  // namespace

double m_convexity_defect(const SurfacePoint& sp, int m) {
  check_m(sp, m);
  double s = 0.0;
  for (int j = 0; j < m; ++j) s += sp.curvatures[static_cast<std::size_t>(j)];
  return s;
}

bool is_m_flat(const SurfacePoint& sp, int m, double tol) {
  check_m(sp, m);
  for (int j = 0; j < m; ++j)
    if (std::abs(sp.curvatures[static_cast<std::size_t>(j)]) > tol) return false;
  return true;
}

FlatnessReport m_flatness_report(const ImplicitDomain& domain, std::span<const Vec> boundary_samples, int m,
                                 std::optional<double> tol, double radius) {
  if (boundary_samples.empty()) throw PreconditionError("m_flatness_report: empty sample set");
  std::vector<SurfacePoint> points;
  points.reserve(boundary_samples.size());
  double max_curv = 0.0;
  for (const Vec& p : boundary_samples) {
    points.push_back(principal_curvatures(domain, p));
    for (double nu : points.back().curvatures) max_curv = std::max(max_curv, std::abs(nu));
  }
  FlatnessReport r;
  r.tolerance = tol.value_or(1e-6 * std::max(1.0, max_curv));
  r.radius = radius;
  r.total = points.size();
  for (const SurfacePoint& sp : points) {
    const bool flat = is_m_flat(sp, m, r.tolerance);
    const bool outside = sp.position.norm() > radius;
    if (outside) ++r.outside;
    if (!flat) continue;
    ++r.flat;
    if (outside) ++r.flat_outside;
    r.flat_points.push_back(sp.position);
    if (!r.flat_bounding_box) {
      r.flat_bounding_box = Box{sp.position, sp.position};
    } else {
      for (int i = 0; i < sp.position.size(); ++i) {
        r.flat_bounding_box->lo[i] = std::min(r.flat_bounding_box->lo[i], sp.position[i]);
        r.flat_bounding_box->hi[i] = std::max(r.flat_bounding_box->hi[i], sp.position[i]);
      }
    }
  }
  r.fraction_flat_outside =
      r.outside == 0 ? 0.0 : static_cast<double>(r.flat_outside) / static_cast<double>(r.outside);
  return r;
}

FlatnessReport m_flatness_report(const ImplicitDomain& domain, const Box& region, int count, Rng& rng, int m,
                                 std::optional<double> tol, double radius) {
  const std::vector<Vec> samples = domain.sample_boundary(region, count, rng);
  return m_flatness_report(domain, samples, m, tol, radius);
}

}  // namespace mcx
