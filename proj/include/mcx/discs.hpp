#pragma once

// Conformal harmonic maps from planar parameter domains, their residuals, and
// the Laplacian of rho composed with them.

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcx/numkit.hpp"
#include "mcx/rng.hpp"

namespace mcx {

using Complex = std::complex<double>;

// Value and derivatives up to order two at z = x + iy.
struct MapJet {
  Vec f, fx, fy, fxx, fxy, fyy;
};

// Disc, rectangle, or annular sector {r0 <= |z - c| <= r1, theta0 <= arg <= theta1}.
struct ParameterDomain {
  enum class Kind { disc, rect, annulus };
  Kind kind = Kind::disc;
  Complex center{0.0, 0.0};
  double r0 = 0.0, r1 = 1.0;
  double theta0 = -M_PI, theta1 = M_PI;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  static ParameterDomain disc(double radius, Complex center = {0.0, 0.0});
  static ParameterDomain rect(double x0, double x1, double y0, double y1);
  static ParameterDomain annulus(double r0, double r1, double theta0 = -M_PI, double theta1 = M_PI,
                                 Complex center = {0.0, 0.0});

  bool contains(Complex z) const;
  // Uniform by rejection from the bounding box.
  Complex sample(Rng& rng) const;
  // nx * ny lattice over the bounding box (polar lattice for annuli), kept if inside.
  std::vector<Complex> lattice(int nx, int ny) const;
};

class ConformalMap {
 public:
  virtual ~ConformalMap() = default;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual MapJet jet(Complex z) const = 0;
  virtual const ParameterDomain& domain() const = 0;
  // Declared rank-zero points; residual checks skip a neighborhood of them.
  virtual std::vector<Complex> branch_points() const { return {}; }

  Vec operator()(Complex z) const { return jet(z).f; }
};

// f(z) = p + x u + y w.
class AffineDisc final : public ConformalMap {
 public:
  AffineDisc(Vec p, Vec u, Vec w, double radius);
  // Round disc of radius R centered at p in the plane spanned by u, w
  // (orthonormalized), |f_x| = |f_y| = 1.
  static AffineDisc round(const Vec& p, const Vec& u, const Vec& w, double radius);

  int dim() const override { return p_.size(); }
  std::string name() const override { return "affine-disc"; }
  MapJet jet(Complex z) const override;
  const ParameterDomain& domain() const override { return dom_; }

 private:
  Vec p_, u_, w_;
  ParameterDomain dom_;
};

// Arbitrary map from a closure; derivatives by central differences.
class LambdaMap final : public ConformalMap {
 public:
  LambdaMap(std::string name, int n, std::function<Vec(Complex)> f, ParameterDomain domain,
            std::vector<Complex> branch_points = {});
  int dim() const override { return n_; }
  std::string name() const override { return name_; }
  MapJet jet(Complex z) const override;
  const ParameterDomain& domain() const override { return dom_; }
  std::vector<Complex> branch_points() const override { return branch_; }

 private:
  std::string name_;
  int n_;
  std::function<Vec(Complex)> f_;
  ParameterDomain dom_;
  std::vector<Complex> branch_;
};

// (a sinh x cos y, a sinh x sin y, a y): helicoid with |f_x|^2 = a^2 cosh^2 x.
class HelicoidMap final : public ConformalMap {
 public:
  explicit HelicoidMap(double a = 1.0, ParameterDomain domain = ParameterDomain::rect(-1.0, 1.0, -M_PI, M_PI));
  int dim() const override { return 3; }
  std::string name() const override { return "helicoid-map"; }
  MapJet jet(Complex z) const override;
  const ParameterDomain& domain() const override { return dom_; }

 private:
  double a_;
  ParameterDomain dom_;
};

// Weierstrass data: Gauss map g and height differential dh = hp(z) dz.
struct WeierstrassEntry {
  std::string name;
  std::function<Complex(Complex)> g, g_prime, hp, hp_prime;
  Complex base{1.0, 0.0};  // integration base point, mapped to f0
  Vec f0 = Vec(3);
  ParameterDomain domain;
  std::vector<Complex> branch_points;
};

// "catenoid" (g = z, dh = dz/z on an annulus), "helicoid" (i times the
// catenoid data on a slit annular sector) and "enneper" (g = z, dh = z dz on a disc).
WeierstrassEntry weierstrass_entry(const std::string& name);
std::vector<std::string> weierstrass_names();

// f(z) = f0 + Re int_base^z Phi, Phi = (1/2 (1/g - g), i/2 (1/g + g), 1) hp.
// The path runs along the circle |z - c| = |base - c| to arg z, then radially;
// composite 8-point Gauss-Legendre with `nodes_per_length` nodes per unit length.
class WeierstrassMap final : public ConformalMap {
 public:
  explicit WeierstrassMap(WeierstrassEntry entry, int nodes_per_length = 64);
  int dim() const override { return 3; }
  std::string name() const override { return entry_.name; }
  MapJet jet(Complex z) const override;
  const ParameterDomain& domain() const override { return entry_.domain; }
  std::vector<Complex> branch_points() const override { return entry_.branch_points; }

  std::array<Complex, 3> phi(Complex z) const;
  std::array<Complex, 3> phi_prime(Complex z) const;
  // int_base^z Phi along the integration path.
  std::array<Complex, 3> integral(Complex z) const;

 private:
  WeierstrassEntry entry_;
  int nodes_;
};

// x -> scale * R x + offset applied to another map; R orthogonal, so
// conformality and harmonicity are preserved.
class SimilarityMap final : public ConformalMap {
 public:
  SimilarityMap(std::shared_ptr<const ConformalMap> base, double scale, Mat rotation, Vec offset);
  int dim() const override { return base_->dim(); }
  std::string name() const override { return base_->name(); }
  MapJet jet(Complex z) const override;
  const ParameterDomain& domain() const override { return base_->domain(); }
  std::vector<Complex> branch_points() const override { return base_->branch_points(); }

 private:
  std::shared_ptr<const ConformalMap> base_;
  double scale_;
  Mat rot_;
  Vec offset_;
};

// (f_x . f_y, |f_x|^2 - |f_y|^2).
std::pair<double, double> conformality_residual(const ConformalMap& f, Complex z);
// Componentwise Laplacian f_xx + f_yy.
Vec harmonicity_residual(const ConformalMap& f, Complex z);

struct ResidualReport {
  std::size_t samples = 0;
  std::size_t skipped = 0;       // within branch_radius of a branch point
  double max_harmonic = 0.0;     // max |Delta f|
  double max_conformal = 0.0;    // max of both residuals over |f_x|^2
  Complex worst_harmonic{};
  Complex worst_conformal{};
};

ResidualReport residual_sweep(const ConformalMap& f, int samples, Rng& rng, double branch_radius = 1e-3);

struct CompositionOptions {
  double harmonic_tol = 1e-6;               // |Delta f| limit, times (1 + |f_x|^2)
  std::function<bool(const Vec&)> inside;   // validity region of rho, if any
};

// Hess rho(f)[f_x, f_x] + Hess rho(f)[f_y, f_y]; the grad rho . Delta f term
// is dropped after checking harmonicity.
double composition_laplacian(const Field& rho, const ConformalMap& f, Complex z, const CompositionOptions& options = {});

struct SweepViolation {
  Complex z;
  Vec point;
  double laplacian;
};

struct SubharmonicityReport {
  std::string map_name;
  std::size_t samples = 0;
  double min_laplacian = 0.0;
  Complex argmin{};
  Vec argmin_point;
  double rho_min = 0.0;             // range of rho o f over the samples
  double rho_max = 0.0;
  double tolerance = 1e-8;
  std::vector<SweepViolation> violations;  // laplacian < -tolerance, capped at 100
  bool pass() const { return violations.empty(); }
};

SubharmonicityReport subharmonicity_sweep(const Field& rho, const ConformalMap& f, const std::vector<Complex>& samples,
                                          double tolerance = 1e-8, const CompositionOptions& options = {},
                                          int workers = 1);

}  // namespace mcx
