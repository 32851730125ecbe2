#include "mcx/discs.hpp"

#include <algorithm>
#include <cmath>

#include "mcx/parallel.hpp"

namespace mcx {

namespace {

constexpr std::array<double, 4> kGlNodes{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                          0.9602898564975363};
constexpr std::array<double, 4> kGlWeights{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                            0.1012285362903763};

using Phi = std::array<Complex, 3>;

Phi& operator+=(Phi& a, const Phi& b) {
  for (int k = 0; k < 3; ++k) a[static_cast<std::size_t>(k)] += b[static_cast<std::size_t>(k)];
  return a;
}

// 8-point Gauss-Legendre on [0, 1] split into `panels`, of integrand(s).
template <class F>
Phi gauss_legendre(F&& integrand, int panels) {
  Phi sum{};
  const double w = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * w;
    for (std::size_t k = 0; k < 4; ++k) {
      for (double sign : {-1.0, 1.0}) {
        Phi v = integrand(mid + sign * 0.5 * w * kGlNodes[k]);
        for (Complex& c : v) c *= 0.5 * w * kGlWeights[k];
        sum += v;
      }
    }
  }
  return sum;
}

int panels_for(double length, int nodes_per_length) {
  return std::max(1, static_cast<int>(std::ceil(length * nodes_per_length / 8.0)));
}

Vec complex_part(const Phi& v, bool real) {
  Vec out(3);
  for (int k = 0; k < 3; ++k) out[k] = real ? v[static_cast<std::size_t>(k)].real() : v[static_cast<std::size_t>(k)].imag();
  return out;
}

void require_inside(const ConformalMap& f, Complex z) {
  if (!f.domain().contains(z))
    throw PreconditionError(f.name() + ": parameter (" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                                ") outside the parameter domain",
                            {z.real(), z.imag()});
}

}  // namespace

ParameterDomain ParameterDomain::disc(double radius, Complex center) {
  if (!(radius > 0.0)) throw PreconditionError("disc radius must be positive", {radius});
  ParameterDomain d;
  d.kind = Kind::disc;
  d.center = center;
  d.r0 = 0.0;
  d.r1 = radius;
  return d;
}

ParameterDomain ParameterDomain::rect(double x0, double x1, double y0, double y1) {
  if (!(x0 < x1 && y0 < y1)) throw PreconditionError("empty parameter rectangle", {x0, x1, y0, y1});
  ParameterDomain d;
  d.kind = Kind::rect;
  d.x0 = x0;
  d.x1 = x1;
  d.y0 = y0;
  d.y1 = y1;
  return d;
}

ParameterDomain ParameterDomain::annulus(double r0, double r1, double theta0, double theta1, Complex center) {
  if (!(0.0 < r0 && r0 < r1) || !(theta0 < theta1) || theta0 < -M_PI || theta1 > M_PI)
    throw PreconditionError("invalid annular sector", {r0, r1, theta0, theta1});
  ParameterDomain d;
  d.kind = Kind::annulus;
  d.center = center;
  d.r0 = r0;
  d.r1 = r1;
  d.theta0 = theta0;
  d.theta1 = theta1;
  return d;
}

bool ParameterDomain::contains(Complex z) const {
  switch (kind) {
    case Kind::disc:
      return std::abs(z - center) <= r1;
    case Kind::rect:
      return x0 <= z.real() && z.real() <= x1 && y0 <= z.imag() && z.imag() <= y1;
    case Kind::annulus: {
      const double r = std::abs(z - center);
      const double t = std::arg(z - center);
      return r0 <= r && r <= r1 && theta0 <= t && t <= theta1;
    }
  }
  return false;
}

Complex ParameterDomain::sample(Rng& rng) const {
  if (kind == Kind::rect) return {rng.uniform(x0, x1), rng.uniform(y0, y1)};
  for (;;) {
    const Complex z = center + Complex(rng.uniform(-r1, r1), rng.uniform(-r1, r1));
    if (contains(z)) return z;
  }
}

std::vector<Complex> ParameterDomain::lattice(int nx, int ny) const {
  if (nx < 1 || ny < 1) throw PreconditionError("lattice counts must be positive", {double(nx), double(ny)});
  auto at = [](double lo, double hi, int i, int n) { return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1); };
  std::vector<Complex> out;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      Complex z;
      if (kind == Kind::rect) {
        z = {at(x0, x1, i, nx), at(y0, y1, j, ny)};
      } else if (kind == Kind::annulus) {
        z = center + std::polar(at(r0, r1, i, nx), at(theta0, theta1, j, ny));
      } else {
        z = center + Complex(at(-r1, r1, i, nx), at(-r1, r1, j, ny));
      }
      if (contains(z)) out.push_back(z);
    }
  }
  return out;
}

AffineDisc::AffineDisc(Vec p, Vec u, Vec w, double radius)
    : p_(std::move(p)), u_(std::move(u)), w_(std::move(w)), dom_(ParameterDomain::disc(radius)) {
  if (u_.size() != p_.size() || w_.size() != p_.size())
    throw PreconditionError("affine disc: dimension mismatch", p_.to_vector());
}

AffineDisc AffineDisc::round(const Vec& p, const Vec& u, const Vec& w, double radius) {
  const std::vector<Vec> in{u, w};
  const std::vector<Vec> b = orthonormalize(in);
  return AffineDisc(p, b[0], b[1], radius);
}

MapJet AffineDisc::jet(Complex z) const {
  const int n = p_.size();
  return {p_ + z.real() * u_ + z.imag() * w_, u_, w_, Vec(n), Vec(n), Vec(n)};
}

LambdaMap::LambdaMap(std::string name, int n, std::function<Vec(Complex)> f, ParameterDomain domain,
                     std::vector<Complex> branch_points)
    : name_(std::move(name)), n_(n), f_(std::move(f)), dom_(domain), branch_(std::move(branch_points)) {}

MapJet LambdaMap::jet(Complex z) const {
  const double h1 = 1e-5 * (1.0 + std::abs(z));
  const double h2 = 1e-4 * (1.0 + std::abs(z));
  const Complex ex(1.0, 0.0), ey(0.0, 1.0);
  MapJet j;
  j.f = f_(z);
  if (j.f.size() != n_) throw FieldEvaluationError(name_ + ": map returned the wrong dimension", {z.real(), z.imag()});
  j.fx = (f_(z + h1 * ex) - f_(z - h1 * ex)) / (2.0 * h1);
  j.fy = (f_(z + h1 * ey) - f_(z - h1 * ey)) / (2.0 * h1);
  j.fxx = (f_(z + h2 * ex) - 2.0 * j.f + f_(z - h2 * ex)) / (h2 * h2);
  j.fyy = (f_(z + h2 * ey) - 2.0 * j.f + f_(z - h2 * ey)) / (h2 * h2);
  j.fxy = (f_(z + h2 * (ex + ey)) - f_(z + h2 * (ex - ey)) - f_(z - h2 * (ex - ey)) + f_(z - h2 * (ex + ey))) /
          (4.0 * h2 * h2);
  return j;
}

HelicoidMap::HelicoidMap(double a, ParameterDomain domain) : a_(a), dom_(domain) {
  if (!(a > 0.0)) throw PreconditionError("helicoid scale must be positive", {a});
}

MapJet HelicoidMap::jet(Complex z) const {
  const double u = z.real(), v = z.imag();
  const double sh = std::sinh(u), ch = std::cosh(u), c = std::cos(v), s = std::sin(v);
  MapJet j;
  j.f = a_ * Vec{sh * c, sh * s, v};
  j.fx = a_ * Vec{ch * c, ch * s, 0.0};
  j.fy = a_ * Vec{-sh * s, sh * c, 1.0};
  j.fxx = a_ * Vec{sh * c, sh * s, 0.0};
  j.fxy = a_ * Vec{-ch * s, ch * c, 0.0};
  j.fyy = a_ * Vec{-sh * c, -sh * s, 0.0};
  return j;
}

WeierstrassEntry weierstrass_entry(const std::string& name) {
  WeierstrassEntry e;
  e.name = name;
  e.g = [](Complex z) { return z; };
  e.g_prime = [](Complex) { return Complex(1.0, 0.0); };
  if (name == "catenoid") {
    e.hp = [](Complex z) { return 1.0 / z; };
    e.hp_prime = [](Complex z) { return -1.0 / (z * z); };
    e.base = 1.0;
    e.f0 = Vec{-1.0, 0.0, 0.0};
    e.domain = ParameterDomain::annulus(0.4, 2.5);
  } else if (name == "helicoid") {
    const Complex i(0.0, 1.0);
    e.hp = [i](Complex z) { return i / z; };
    e.hp_prime = [i](Complex z) { return -i / (z * z); };
    e.base = 1.0;
    e.f0 = Vec{0.0, 0.0, 0.0};
    e.domain = ParameterDomain::annulus(0.4, 2.5, -3.0, 3.0);
  } else if (name == "enneper") {
    e.hp = [](Complex z) { return z; };
    e.hp_prime = [](Complex) { return Complex(1.0, 0.0); };
    e.base = 0.0;
    e.f0 = Vec{0.0, 0.0, 0.0};
    e.domain = ParameterDomain::disc(1.2);
  } else {
    throw PreconditionError("unknown Weierstrass entry '" + name + "'");
  }
  return e;
}

std::vector<std::string> weierstrass_names() { return {"catenoid", "helicoid", "enneper"}; }

WeierstrassMap::WeierstrassMap(WeierstrassEntry entry, int nodes_per_length)
    : entry_(std::move(entry)), nodes_(nodes_per_length) {
  if (nodes_ < 8) throw PreconditionError("at least 8 quadrature nodes per unit length are required", {double(nodes_)});
  if (!entry_.domain.contains(entry_.base))
    throw PreconditionError(entry_.name + ": base point outside the parameter domain",
                            {entry_.base.real(), entry_.base.imag()});
}

std::array<Complex, 3> WeierstrassMap::phi(Complex z) const {
  const Complex g = entry_.g(z), hp = entry_.hp(z);
  const Complex i(0.0, 1.0);
  return {0.5 * (1.0 / g - g) * hp, 0.5 * i * (1.0 / g + g) * hp, hp};
}

std::array<Complex, 3> WeierstrassMap::phi_prime(Complex z) const {
  const Complex g = entry_.g(z), gp = entry_.g_prime(z), hp = entry_.hp(z), hpp = entry_.hp_prime(z);
  const Complex i(0.0, 1.0);
  const Complex dinv = -gp / (g * g);
  return {0.5 * (dinv - gp) * hp + 0.5 * (1.0 / g - g) * hpp, 0.5 * i * (dinv + gp) * hp + 0.5 * i * (1.0 / g + g) * hpp,
          hpp};
}

std::array<Complex, 3> WeierstrassMap::integral(Complex z) const {
  require_inside(*this, z);
  Phi total{};
  Complex start = entry_.base;
  if (entry_.domain.kind == ParameterDomain::Kind::annulus) {
    const Complex c = entry_.domain.center;
    const double r = std::abs(start - c);
    const double t0 = std::arg(start - c), t1 = std::arg(z - c);
    if (t1 != t0) {
      auto on_arc = [&](double s) {
        const Complex p = c + std::polar(r, t0 + s * (t1 - t0));
        Phi v = phi(p);
        const Complex dp = Complex(0.0, 1.0) * (p - c) * (t1 - t0);
        for (Complex& x : v) x *= dp;
        return v;
      };
      total += gauss_legendre(on_arc, panels_for(r * std::abs(t1 - t0), nodes_));
      start = c + std::polar(r, t1);
    }
  }
  const Complex d = z - start;
  if (std::abs(d) > 0.0) {
    auto on_segment = [&](double s) {
      Phi v = phi(start + s * d);
      for (Complex& x : v) x *= d;
      return v;
    };
    total += gauss_legendre(on_segment, panels_for(std::abs(d), nodes_));
  }
  return total;
}

MapJet WeierstrassMap::jet(Complex z) const {
  const Phi p = phi(z), pp = phi_prime(z);
  MapJet j;
  j.f = entry_.f0 + complex_part(integral(z), true);
  j.fx = complex_part(p, true);
  j.fy = -complex_part(p, false);
  j.fxx = complex_part(pp, true);
  j.fxy = -complex_part(pp, false);
  j.fyy = -complex_part(pp, true);
  return j;
}

SimilarityMap::SimilarityMap(std::shared_ptr<const ConformalMap> base, double scale, Mat rotation, Vec offset)
    : base_(std::move(base)), scale_(scale), rot_(std::move(rotation)), offset_(std::move(offset)) {
  const int n = base_->dim();
  if (rot_.size() != n || offset_.size() != n) throw PreconditionError("similarity: dimension mismatch");
  if (!(scale_ > 0.0)) throw PreconditionError("similarity scale must be positive", {scale_});
  Mat e = rot_.transposed() * rot_;
  e += -1.0 * Mat::identity(n);
  if (e.frobenius() > 1e-10) throw PreconditionError("similarity rotation is not orthogonal", {e.frobenius()});
}

MapJet SimilarityMap::jet(Complex z) const {
  const MapJet b = base_->jet(z);
  auto lin = [&](const Vec& v) { return scale_ * (rot_ * v); };
  return {lin(b.f) + offset_, lin(b.fx), lin(b.fy), lin(b.fxx), lin(b.fxy), lin(b.fyy)};
}

std::pair<double, double> conformality_residual(const ConformalMap& f, Complex z) {
  require_inside(f, z);
  const MapJet j = f.jet(z);
  return {j.fx.dot(j.fy), j.fx.norm2() - j.fy.norm2()};
}

Vec harmonicity_residual(const ConformalMap& f, Complex z) {
  require_inside(f, z);
  const MapJet j = f.jet(z);
  return j.fxx + j.fyy;
}

ResidualReport residual_sweep(const ConformalMap& f, int samples, Rng& rng, double branch_radius) {
  ResidualReport r;
  const std::vector<Complex> branch = f.branch_points();
  for (int k = 0; k < samples; ++k) {
    const Complex z = f.domain().sample(rng);
    const bool near_branch =
        std::any_of(branch.begin(), branch.end(), [&](Complex b) { return std::abs(z - b) < branch_radius; });
    if (near_branch) {
      ++r.skipped;
      continue;
    }
    ++r.samples;
    const MapJet j = f.jet(z);
    const double harm = (j.fxx + j.fyy).norm();
    if (harm > r.max_harmonic) r.max_harmonic = harm, r.worst_harmonic = z;
    const double scale = std::max(j.fx.norm2(), j.fy.norm2());
    const double conf =
        std::max(std::abs(j.fx.dot(j.fy)), std::abs(j.fx.norm2() - j.fy.norm2())) / (scale > 0.0 ? scale : 1.0);
    if (conf > r.max_conformal) r.max_conformal = conf, r.worst_conformal = z;
  }
  return r;
}

double composition_laplacian(const Field& rho, const ConformalMap& f, Complex z, const CompositionOptions& options) {
  require_inside(f, z);
  const MapJet j = f.jet(z);
  if (j.f.size() != rho.dim()) throw PreconditionError("composition: map and field dimensions differ");
  const double harm = (j.fxx + j.fyy).norm();
  if (harm > options.harmonic_tol * (1.0 + j.fx.norm2()))
    throw PreconditionError(f.name() + ": map is not harmonic at the sample, |Delta f| = " + std::to_string(harm),
                            {z.real(), z.imag(), harm});
  if (options.inside && !options.inside(j.f))
    throw PreconditionError(f.name() + ": image point " + format_vec(j.f) + " outside the field's region",
                            j.f.to_vector());
  const SymMatrix h = rho.hessian(j.f);
  return h.quadratic(j.fx) + h.quadratic(j.fy);
}

SubharmonicityReport subharmonicity_sweep(const Field& rho, const ConformalMap& f, const std::vector<Complex>& samples,
                                          double tolerance, const CompositionOptions& options, int workers) {
  if (samples.empty()) throw PreconditionError("subharmonicity sweep needs at least one sample");
  std::vector<double> lap(samples.size()), val(samples.size());
  std::vector<Vec> pts(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    try {
      lap[i] = composition_laplacian(rho, f, samples[i], options);
      pts[i] = f(samples[i]);
      val[i] = rho.value(pts[i]);
    } catch (const Error& e) {
      std::vector<double> loc{samples[i].real(), samples[i].imag()};
      throw Error(f.name() + " sample " + std::to_string(i) + ": " + e.what(), loc);
    }
  });
  SubharmonicityReport r;
  r.map_name = f.name();
  r.samples = samples.size();
  r.tolerance = tolerance;
  r.min_laplacian = lap[0];
  r.argmin = samples[0];
  r.argmin_point = pts[0];
  r.rho_min = r.rho_max = val[0];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (lap[i] < r.min_laplacian) r.min_laplacian = lap[i], r.argmin = samples[i], r.argmin_point = pts[i];
    r.rho_min = std::min(r.rho_min, val[i]);
    r.rho_max = std::max(r.rho_max, val[i]);
    if (lap[i] < -tolerance && r.violations.size() < 100) r.violations.push_back({samples[i], pts[i], lap[i]});
  }
  return r;
}

}  // namespace mcx
