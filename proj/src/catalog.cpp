#include "mcx/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Keeps the `count` candidates nearest to x.
std::vector<Vec> nearest(std::vector<Vec> candidates, const Vec& x, int count) {
  const auto n = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(std::max(count, 0)));
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                    [&](const Vec& a, const Vec& b) { return (a - x).norm2() < (b - x).norm2(); });
  candidates.resize(n);
  return candidates;
}

Vec v3(double a, double b, double c) { return Vec{a, b, c}; }

double uniform_in(Rng& rng, const Box& region, int axis) { return rng.uniform(region.lo[axis], region.hi[axis]); }

}  // namespace

std::optional<std::vector<double>> CatalogSurface::analytic_curvatures(const Vec&) const { return std::nullopt; }

std::vector<Vec> sample_charts(const std::vector<Chart>& charts, const Box& region, int count, Rng& rng) {
  std::vector<Vec> out;
  if (charts.empty() || count <= 0) return out;
  const long max_attempts = 400L * count + 1000;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
    const Chart& c = charts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(charts.size())))];
    const double u = rng.uniform(c.u0, c.u1);
    const double v = rng.uniform(c.v0, c.v1);
    const Vec x = c.jet(u, v).x;
    if (x.all_finite() && region.contains(x)) out.push_back(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Halfspace

HalfspaceDomain::HalfspaceDomain(int n) : n_(n) {
  if (n < 2 || n > kMaxDim) throw PreconditionError("plane: dimension out of range");
}

Vec HalfspaceDomain::gradient(const Vec&) const { return Vec::unit(n_, n_ - 1); }
SymMatrix HalfspaceDomain::hessian(const Vec&) const { return SymMatrix(n_); }

std::vector<Vec> HalfspaceDomain::boundary_seeds(const Vec& x, int) const {
  Vec p = x;
  p[n_ - 1] = 0.0;
  return {p};
}

std::vector<Vec> HalfspaceDomain::sample_boundary(const Box& region, int count, Rng& rng) const {
  std::vector<Vec> out;
  if (region.lo[n_ - 1] > 0.0 || region.hi[n_ - 1] < 0.0) return out;
  for (int k = 0; k < count; ++k) {
    Vec p(n_);
    for (int i = 0; i < n_ - 1; ++i) p[i] = uniform_in(rng, region, i);
    out.push_back(p);
  }
  return out;
}

std::optional<double> HalfspaceDomain::declared_reach() const { return kInf; }

std::vector<Chart> HalfspaceDomain::charts() const {
  if (n_ != 3) return {};
  return {Chart{"plane",
                [](double u, double v) {
                  const Vec z(3);
                  return SurfaceJet{v3(u, v, 0), v3(1, 0, 0), v3(0, 1, 0), z, z, z};
                },
                -2, 2, -2, 2}};
}

std::optional<std::vector<double>> HalfspaceDomain::analytic_curvatures(const Vec&) const {
  return std::vector<double>(static_cast<std::size_t>(n_ - 1), 0.0);
}

// ---------------------------------------------------------------------------
// Ball

BallDomain::BallDomain(int n, double radius) : n_(n), radius_(radius) {
  if (n < 2 || n > kMaxDim) throw PreconditionError("sphere: dimension out of range");
  if (!(radius > 0.0)) throw PreconditionError("sphere: radius must be positive");
  // Fixed seed lattice: Fibonacci sphere in R^3, signed axes otherwise.
  if (n == 3) {
    const int k = 64;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / k;
      const double r = std::sqrt(1.0 - z * z);
      lattice_.push_back(radius * v3(r * std::cos(golden * i), r * std::sin(golden * i), z));
    }
  } else {
    for (int i = 0; i < n; ++i) {
      lattice_.push_back(radius * Vec::unit(n, i));
      lattice_.push_back(-radius * Vec::unit(n, i));
    }
  }
}

double BallDomain::value(const Vec& x) const { return (x.norm2() - radius_ * radius_) / (2.0 * radius_); }
Vec BallDomain::gradient(const Vec& x) const { return x / radius_; }
SymMatrix BallDomain::hessian(const Vec&) const {
  return SymMatrix::diagonal(Vec(n_, 1.0 / radius_));
}

std::vector<Vec> BallDomain::boundary_seeds(const Vec& x, int count) const {
  std::vector<Vec> seeds;
  const double r = x.norm();
  if (r > 1e-12 * radius_) {
    seeds.push_back(radius_ / r * x);
    seeds.push_back(-radius_ / r * x);
  }
  for (const Vec& q : nearest(lattice_, x, count - static_cast<int>(seeds.size()))) seeds.push_back(q);
  return seeds;
}

std::vector<Vec> BallDomain::sample_boundary(const Box& region, int count, Rng& rng) const {
  std::vector<Vec> out;
  const long max_attempts = 400L * count + 1000;
  for (long a = 0; a < max_attempts && static_cast<int>(out.size()) < count; ++a) {
    const Vec p = radius_ * rng.unit_vec(n_);
    if (region.contains(p)) out.push_back(p);
  }
  return out;
}

Box BallDomain::default_region() const { return Box::cube(n_, 1.25 * radius_); }

std::vector<Chart> BallDomain::charts() const {
  if (n_ != 3) return {};
  const double R = radius_;
  // Polar angle v in (0, pi) avoids the chart's poles.
  return {Chart{"sphere",
                [R](double u, double v) {
                  const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
                  return SurfaceJet{R * v3(sv * cu, sv * su, cv),   R * v3(-sv * su, sv * cu, 0),
                                    R * v3(cv * cu, cv * su, -sv),  R * v3(-sv * cu, -sv * su, 0),
                                    R * v3(-cv * su, cv * cu, 0),   R * v3(-sv * cu, -sv * su, -cv)};
                },
                0.0, 2.0 * M_PI, 0.05, M_PI - 0.05}};
}

std::optional<std::vector<double>> BallDomain::analytic_curvatures(const Vec&) const {
  return std::vector<double>(static_cast<std::size_t>(n_ - 1), 1.0 / radius_);
}

// ---------------------------------------------------------------------------
// Cylinder

CylinderDomain::CylinderDomain(int n, double radius) : n_(n), radius_(radius) {
  if (n < 3 || n > kMaxDim) throw PreconditionError("cylinder: dimension out of range");
  if (!(radius > 0.0)) throw PreconditionError("cylinder: radius must be positive");
}

double CylinderDomain::value(const Vec& x) const {
  return (x[0] * x[0] + x[1] * x[1] - radius_ * radius_) / (2.0 * radius_);
}

Vec CylinderDomain::gradient(const Vec& x) const {
  Vec g(n_);
  g[0] = x[0] / radius_;
  g[1] = x[1] / radius_;
  return g;
}

SymMatrix CylinderDomain::hessian(const Vec&) const {
  SymMatrix h(n_);
  h.set(0, 0, 1.0 / radius_);
  h.set(1, 1, 1.0 / radius_);
  return h;
}

std::vector<Vec> CylinderDomain::boundary_seeds(const Vec& x, int count) const {
  std::vector<Vec> seeds;
  const double r = std::hypot(x[0], x[1]);
  if (r > 1e-12 * radius_) {
    Vec p = x;
    p[0] = radius_ * x[0] / r;
    p[1] = radius_ * x[1] / r;
    seeds.push_back(p);
  }
  const int k = std::max(count - static_cast<int>(seeds.size()), 0);
  for (int i = 0; i < k; ++i) {
    Vec p = x;
    const double t = 2.0 * M_PI * i / k;
    p[0] = radius_ * std::cos(t);
    p[1] = radius_ * std::sin(t);
    seeds.push_back(p);
  }
  return seeds;
}

std::vector<Vec> CylinderDomain::sample_boundary(const Box& region, int count, Rng& rng) const {
  std::vector<Vec> out;
  const long max_attempts = 400L * count + 1000;
  for (long a = 0; a < max_attempts && static_cast<int>(out.size()) < count; ++a) {
    Vec p(n_);
    const double t = rng.uniform(0.0, 2.0 * M_PI);
    p[0] = radius_ * std::cos(t);
    p[1] = radius_ * std::sin(t);
    for (int i = 2; i < n_; ++i) p[i] = uniform_in(rng, region, i);
    if (region.contains(p)) out.push_back(p);
  }
  return out;
}

Box CylinderDomain::default_region() const {
  Box b = Box::cube(n_, 2.0 * radius_);
  b.lo[0] = b.lo[1] = -1.25 * radius_;
  b.hi[0] = b.hi[1] = 1.25 * radius_;
  return b;
}

std::vector<Chart> CylinderDomain::charts() const {
  if (n_ != 3) return {};
  const double R = radius_;
  return {Chart{"cylinder",
                [R](double u, double v) {
                  const double cu = std::cos(u), su = std::sin(u);
                  const Vec z(3);
                  return SurfaceJet{v3(R * cu, R * su, v), v3(-R * su, R * cu, 0), v3(0, 0, 1),
                                    v3(-R * cu, -R * su, 0), z, z};
                },
                0.0, 2.0 * M_PI, -2.0, 2.0}};
}

std::optional<std::vector<double>> CylinderDomain::analytic_curvatures(const Vec&) const {
  std::vector<double> nu(static_cast<std::size_t>(n_ - 1), 0.0);
  nu.back() = 1.0 / radius_;
  return nu;
}

// ---------------------------------------------------------------------------
// Slab

SlabDomain::SlabDomain(int n, double half_width) : n_(n), w_(half_width) {
  if (n < 2 || n > kMaxDim) throw PreconditionError("slab: dimension out of range");
  if (!(half_width > 0.0)) throw PreconditionError("slab: half width must be positive");
}

double SlabDomain::value(const Vec& x) const {
  const double t = x[n_ - 1];
  return (t * t - w_ * w_) / (2.0 * w_);
}

Vec SlabDomain::gradient(const Vec& x) const {
  Vec g(n_);
  g[n_ - 1] = x[n_ - 1] / w_;
  return g;
}

SymMatrix SlabDomain::hessian(const Vec&) const {
  SymMatrix h(n_);
  h.set(n_ - 1, n_ - 1, 1.0 / w_);
  return h;
}

std::vector<Vec> SlabDomain::boundary_seeds(const Vec& x, int) const {
  Vec up = x, down = x;
  up[n_ - 1] = w_;
  down[n_ - 1] = -w_;
  return {up, down};
}

std::vector<Vec> SlabDomain::sample_boundary(const Box& region, int count, Rng& rng) const {
  std::vector<Vec> out;
  const long max_attempts = 400L * count + 1000;
  for (long a = 0; a < max_attempts && static_cast<int>(out.size()) < count; ++a) {
    Vec p(n_);
    for (int i = 0; i < n_ - 1; ++i) p[i] = uniform_in(rng, region, i);
    p[n_ - 1] = rng.uniform() < 0.5 ? -w_ : w_;
    if (region.contains(p)) out.push_back(p);
  }
  return out;
}

std::vector<Chart> SlabDomain::charts() const {
  if (n_ != 3) return {};
  const double w = w_;
  std::vector<Chart> out;
  for (double side : {1.0, -1.0}) {
    out.push_back(Chart{side > 0 ? "slab-top" : "slab-bottom",
                        [w, side](double u, double v) {
                          const Vec z(3);
                          return SurfaceJet{v3(u, v, side * w), v3(1, 0, 0), v3(0, 1, 0), z, z, z};
                        },
                        -2, 2, -2, 2});
  }
  return out;
}

std::optional<std::vector<double>> SlabDomain::analytic_curvatures(const Vec&) const {
  return std::vector<double>(static_cast<std::size_t>(n_ - 1), 0.0);
}

// ---------------------------------------------------------------------------
// Catenoid

CatenoidDomain::CatenoidDomain(double a) : a_(a) {
  if (!(a > 0.0)) throw PreconditionError("catenoid: scale must be positive");
}

double CatenoidDomain::value(const Vec& x) const { return std::hypot(x[0], x[1]) - a_ * std::cosh(x[2] / a_); }

Vec CatenoidDomain::gradient(const Vec& x) const {
  const double r = std::hypot(x[0], x[1]);
  const double gz = -std::sinh(x[2] / a_);
  if (r == 0.0) return v3(0, 0, gz);
  return v3(x[0] / r, x[1] / r, gz);
}

SymMatrix CatenoidDomain::hessian(const Vec& x) const {
  const double r = std::hypot(x[0], x[1]);
  SymMatrix h(3);
  if (r > 0.0) {
    const double r3 = r * r * r;
    h.set(0, 0, x[1] * x[1] / r3);
    h.set(1, 1, x[0] * x[0] / r3);
    h.set(0, 1, -x[0] * x[1] / r3);
  }
  h.set(2, 2, -std::cosh(x[2] / a_) / a_);
  return h;
}

std::vector<Vec> CatenoidDomain::boundary_seeds(const Vec& x, int count) const {
  std::vector<Vec> lattice;
  const double r = std::hypot(x[0], x[1]);
  if (r > 1e-12 * a_) {
    const double rr = a_ * std::cosh(x[2] / a_);
    lattice.push_back(v3(rr * x[0] / r, rr * x[1] / r, x[2]));
  }
  const int nu = 24, nv = 7;
  for (int j = 0; j < nv; ++j) {
    const double z = x[2] + a_ * (-1.5 + 3.0 * j / (nv - 1));
    const double rr = a_ * std::cosh(z / a_);
    for (int i = 0; i < nu; ++i) {
      const double t = 2.0 * M_PI * i / nu;
      lattice.push_back(v3(rr * std::cos(t), rr * std::sin(t), z));
    }
  }
  std::vector<Vec> seeds;
  if (r > 1e-12 * a_) seeds.push_back(lattice.front());
  for (const Vec& q : nearest(std::move(lattice), x, count - static_cast<int>(seeds.size()))) {
    if (!seeds.empty() && q == seeds.front()) continue;
    seeds.push_back(q);
  }
  return seeds;
}

std::vector<Vec> CatenoidDomain::sample_boundary(const Box& region, int count, Rng& rng) const {
  std::vector<Vec> out;
  const long max_attempts = 400L * count + 1000;
  for (long a = 0; a < max_attempts && static_cast<int>(out.size()) < count; ++a) {
    const double z = uniform_in(rng, region, 2);
    const double t = rng.uniform(0.0, 2.0 * M_PI);
    const double rr = a_ * std::cosh(z / a_);
    const Vec p = v3(rr * std::cos(t), rr * std::sin(t), z);
    if (region.contains(p)) out.push_back(p);
  }
  return out;
}

Box CatenoidDomain::default_region() const {
  return Box{v3(-2.5 * a_, -2.5 * a_, -1.0 * a_), v3(2.5 * a_, 2.5 * a_, 1.0 * a_)};
}

std::vector<Chart> CatenoidDomain::charts() const {
  const double a = a_;
  return {Chart{"catenoid",
                [a](double u, double v) {
                  const double ch = std::cosh(v / a), sh = std::sinh(v / a);
                  const double cu = std::cos(u), su = std::sin(u);
                  return SurfaceJet{v3(a * ch * cu, a * ch * su, v),   v3(-a * ch * su, a * ch * cu, 0),
                                    v3(sh * cu, sh * su, 1),           v3(-a * ch * cu, -a * ch * su, 0),
                                    v3(-sh * su, sh * cu, 0),          v3(ch * cu / a, ch * su / a, 0)};
                },
                0.0, 2.0 * M_PI, -1.0 * a, 1.0 * a}};
}

std::optional<std::vector<double>> CatenoidDomain::analytic_curvatures(const Vec& p) const {
  const double ch = std::cosh(p[2] / a_);
  const double k = 1.0 / (a_ * ch * ch);
  return std::vector<double>{-k, k};
}

// ---------------------------------------------------------------------------
// Helicoid

HelicoidDomain::HelicoidDomain(double a) : a_(a) {
  if (!(a > 0.0)) throw PreconditionError("helicoid: pitch must be positive");
}

double HelicoidDomain::value(const Vec& x) const {
  const double t = x[2] / a_;
  return x[0] * std::sin(t) - x[1] * std::cos(t);
}

Vec HelicoidDomain::gradient(const Vec& x) const {
  const double t = x[2] / a_;
  const double c = std::cos(t), s = std::sin(t);
  return v3(s, -c, (x[0] * c + x[1] * s) / a_);
}

SymMatrix HelicoidDomain::hessian(const Vec& x) const {
  const double t = x[2] / a_;
  const double c = std::cos(t), s = std::sin(t);
  SymMatrix h(3);
  h.set(0, 2, c / a_);
  h.set(1, 2, s / a_);
  h.set(2, 2, (-x[0] * s + x[1] * c) / (a_ * a_));
  return h;
}

std::vector<Vec> HelicoidDomain::boundary_seeds(const Vec& x, int count) const {
  std::vector<Vec> lattice;
  const double t0 = x[2] / a_;
  const double r = std::hypot(x[0], x[1]);
  const int nt = 17, ns = 9;
  for (int j = 0; j < nt; ++j) {
    const double t = t0 + M_PI * (-1.0 + 2.0 * j / (nt - 1));
    for (int i = 0; i < ns; ++i) {
      const double s = (r + 2.0 * a_) * (-1.0 + 2.0 * i / (ns - 1));
      lattice.push_back(v3(s * std::cos(t), s * std::sin(t), a_ * t));
    }
  }
  // Point of the ruling at height z closest to x.
  std::vector<Vec> seeds;
  const double s0 = x[0] * std::cos(t0) + x[1] * std::sin(t0);
  seeds.push_back(v3(s0 * std::cos(t0), s0 * std::sin(t0), x[2]));
  for (const Vec& q : nearest(std::move(lattice), x, count - 1)) seeds.push_back(q);
  return seeds;
}

std::vector<Vec> HelicoidDomain::sample_boundary(const Box& region, int count, Rng& rng) const {
  std::vector<Vec> out;
  const double smax = std::max({std::abs(region.lo[0]), std::abs(region.hi[0]), std::abs(region.lo[1]),
                                std::abs(region.hi[1])}) *
                      std::sqrt(2.0);
  const long max_attempts = 400L * count + 1000;
  for (long a = 0; a < max_attempts && static_cast<int>(out.size()) < count; ++a) {
    const double z = uniform_in(rng, region, 2);
    const double s = rng.uniform(-smax, smax);
    const double t = z / a_;
    const Vec p = v3(s * std::cos(t), s * std::sin(t), z);
    if (region.contains(p)) out.push_back(p);
  }
  return out;
}

Box HelicoidDomain::default_region() const {
  return Box{v3(-1.5 * a_, -1.5 * a_, -M_PI * a_), v3(1.5 * a_, 1.5 * a_, M_PI * a_)};
}

std::vector<Chart> HelicoidDomain::charts() const {
  const double a = a_;
  return {Chart{"helicoid",
                [a](double s, double t) {
                  const double c = std::cos(t), sn = std::sin(t);
                  return SurfaceJet{v3(s * c, s * sn, a * t), v3(c, sn, 0),         v3(-s * sn, s * c, a),
                                    Vec(3),                  v3(-sn, c, 0),        v3(-s * c, -s * sn, 0)};
                },
                -1.5 * a, 1.5 * a, -M_PI, M_PI}};
}

std::optional<std::vector<double>> HelicoidDomain::analytic_curvatures(const Vec& p) const {
  const double s2 = p[0] * p[0] + p[1] * p[1];
  const double k = a_ / (a_ * a_ + s2);
  return std::vector<double>{-k, k};
}

// ---------------------------------------------------------------------------
// Scherk

double ScherkDomain::value(const Vec& x) const { return std::exp(x[2]) * std::cos(x[0]) - std::cos(x[1]); }

Vec ScherkDomain::gradient(const Vec& x) const {
  const double e = std::exp(x[2]);
  return v3(-e * std::sin(x[0]), std::sin(x[1]), e * std::cos(x[0]));
}

SymMatrix ScherkDomain::hessian(const Vec& x) const {
  const double e = std::exp(x[2]);
  const double c = std::cos(x[0]), s = std::sin(x[0]);
  SymMatrix h(3);
  h.set(0, 0, -e * c);
  h.set(0, 2, -e * s);
  h.set(1, 1, std::cos(x[1]));
  h.set(2, 2, e * c);
  return h;
}

std::vector<Vec> ScherkDomain::boundary_seeds(const Vec& x, int count) const {
  std::vector<Vec> lattice;
  const int k = 11;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double u = x[0] + 1.2 * (-1.0 + 2.0 * i / (k - 1));
      const double v = x[1] + 1.2 * (-1.0 + 2.0 * j / (k - 1));
      const double ratio = std::cos(v) / std::cos(u);
      if (!(ratio > 1e-6) || !std::isfinite(ratio)) continue;
      lattice.push_back(v3(u, v, std::log(ratio)));
    }
  }
  return nearest(std::move(lattice), x, count);
}

std::vector<Vec> ScherkDomain::sample_boundary(const Box& region, int count, Rng& rng) const {
  return sample_charts(charts(), region, count, rng);
}

Box ScherkDomain::default_region() const { return Box{v3(-1.3, -1.3, -1.5), v3(1.3, 1.3, 1.5)}; }

std::vector<Chart> ScherkDomain::charts() const {
  // Graph z = log(cos v / cos u) over the fundamental square.
  return {Chart{"scherk",
                [](double u, double v) {
                  const double tu = std::tan(u), tv = std::tan(v);
                  const double z = std::log(std::cos(v) / std::cos(u));
                  return SurfaceJet{v3(u, v, z),
                                    v3(1, 0, tu),
                                    v3(0, 1, -tv),
                                    v3(0, 0, 1.0 + tu * tu),
                                    Vec(3),
                                    v3(0, 0, -(1.0 + tv * tv))};
                },
                -1.3, 1.3, -1.3, 1.3}};
}

Chart enneper_chart(double extent) {
  return Chart{"enneper",
               [](double u, double v) {
                 return SurfaceJet{v3(u - u * u * u / 3.0 + u * v * v, v - v * v * v / 3.0 + v * u * u, u * u - v * v),
                                   v3(1.0 - u * u + v * v, 2.0 * u * v, 2.0 * u),
                                   v3(2.0 * u * v, 1.0 - v * v + u * u, -2.0 * v),
                                   v3(-2.0 * u, 2.0 * v, 2.0),
                                   v3(2.0 * v, 2.0 * u, 0.0),
                                   v3(2.0 * u, -2.0 * v, -2.0)};
               },
               -extent, extent, -extent, extent};
}

// ---------------------------------------------------------------------------
// Factory

namespace {

double param(const CatalogParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

int dim_param(const CatalogParams& p) {
  const double d = param(p, "dim", 3.0);
  if (d != std::floor(d)) throw PreconditionError("dim must be an integer");
  return static_cast<int>(d);
}

}  // namespace

DomainPtr make_domain(const std::string& name, const CatalogParams& params) {
  if (name == "plane" || name == "halfspace") return std::make_shared<HalfspaceDomain>(dim_param(params));
  if (name == "sphere" || name == "ball")
    return std::make_shared<BallDomain>(dim_param(params), param(params, "radius", 1.0));
  if (name == "cylinder") return std::make_shared<CylinderDomain>(dim_param(params), param(params, "radius", 1.0));
  if (name == "slab") return std::make_shared<SlabDomain>(dim_param(params), param(params, "half_width", 1.0));
  if (name == "catenoid") return std::make_shared<CatenoidDomain>(param(params, "scale", 1.0));
  if (name == "helicoid") return std::make_shared<HelicoidDomain>(param(params, "scale", 1.0));
  if (name == "scherk") return std::make_shared<ScherkDomain>();
  throw PreconditionError("unknown surface '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"plane", "sphere", "cylinder", "slab", "catenoid", "helicoid", "scherk"};
}

}  // namespace mcx
