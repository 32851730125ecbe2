#pragma once

// Test corpus of hypersurfaces with closed-form defining functions,
// parametrizations and (where known) curvature formulas.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcx/surfaces.hpp"

namespace mcx {

// A parameter patch (u, v) -> R^3 with its second-order jet.
struct Chart {
  std::string name;
  std::function<SurfaceJet(double u, double v)> jet;
  double u0, u1, v0, v1;
};

class CatalogSurface : public ImplicitDomain {
 public:
  // Parametrizations of M (only for dim() == 3). Each chart's normal may be
  // either orientation; callers orient it with the domain's inner normal.
  virtual std::vector<Chart> charts() const { return {}; }
  // Inner-side principal curvatures at a boundary point, ascending.
  virtual std::optional<std::vector<double>> analytic_curvatures(const Vec& p) const;
  virtual bool is_minimal() const { return false; }
};

using DomainPtr = std::shared_ptr<const CatalogSurface>;

// {x_n < 0}
class HalfspaceDomain final : public CatalogSurface {
 public:
  explicit HalfspaceDomain(int n = 3);
  int dim() const override { return n_; }
  std::string name() const override { return "plane"; }
  double value(const Vec& x) const override { return x[n_ - 1]; }
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;
  std::vector<Vec> boundary_seeds(const Vec& x, int count) const override;
  std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const override;
  std::optional<double> declared_reach() const override;
  std::vector<Chart> charts() const override;
  std::optional<std::vector<double>> analytic_curvatures(const Vec& p) const override;
  bool is_minimal() const override { return true; }

 private:
  int n_;
};

// Ball of radius R about the origin; phi = (|x|^2 - R^2) / (2R).
class BallDomain final : public CatalogSurface {
 public:
  explicit BallDomain(int n = 3, double radius = 1.0);
  int dim() const override { return n_; }
  std::string name() const override { return "sphere"; }
  double radius() const { return radius_; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;
  double length_scale() const override { return radius_; }
  std::vector<Vec> boundary_seeds(const Vec& x, int count) const override;
  std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const override;
  std::optional<double> declared_reach() const override { return radius_; }
  Box default_region() const override;
  std::vector<Chart> charts() const override;
  std::optional<std::vector<double>> analytic_curvatures(const Vec& p) const override;

 private:
  int n_;
  double radius_;
  std::vector<Vec> lattice_;
};

// Solid cylinder x_0^2 + x_1^2 < R^2.
class CylinderDomain final : public CatalogSurface {
 public:
  explicit CylinderDomain(int n = 3, double radius = 1.0);
  int dim() const override { return n_; }
  std::string name() const override { return "cylinder"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;
  double length_scale() const override { return radius_; }
  std::vector<Vec> boundary_seeds(const Vec& x, int count) const override;
  std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const override;
  std::optional<double> declared_reach() const override { return radius_; }
  Box default_region() const override;
  std::vector<Chart> charts() const override;
  std::optional<std::vector<double>> analytic_curvatures(const Vec& p) const override;

 private:
  int n_;
  double radius_;
};

// Slab |x_n| < w; phi = (x_n^2 - w^2) / (2w).
class SlabDomain final : public CatalogSurface {
 public:
  explicit SlabDomain(int n = 3, double half_width = 1.0);
  int dim() const override { return n_; }
  std::string name() const override { return "slab"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;
  double length_scale() const override { return w_; }
  std::vector<Vec> boundary_seeds(const Vec& x, int count) const override;
  std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const override;
  std::optional<double> declared_reach() const override { return w_; }
  std::vector<Chart> charts() const override;
  std::optional<std::vector<double>> analytic_curvatures(const Vec& p) const override;
  bool is_minimal() const override { return true; }

 private:
  int n_;
  double w_;
};

// Inner side of the catenoid r = a cosh(z / a); phi = r - a cosh(z / a).
class CatenoidDomain final : public CatalogSurface {
 public:
  explicit CatenoidDomain(double a = 1.0);
  int dim() const override { return 3; }
  std::string name() const override { return "catenoid"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;
  double length_scale() const override { return a_; }
  std::vector<Vec> boundary_seeds(const Vec& x, int count) const override;
  std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const override;
  std::optional<double> declared_reach() const override { return a_; }
  Box default_region() const override;
  std::vector<Chart> charts() const override;
  std::optional<std::vector<double>> analytic_curvatures(const Vec& p) const override;
  bool is_minimal() const override { return true; }

 private:
  double a_;
};

// Helicoid (s cos t, s sin t, a t); phi = x sin(z/a) - y cos(z/a).
class HelicoidDomain final : public CatalogSurface {
 public:
  explicit HelicoidDomain(double a = 1.0);
  int dim() const override { return 3; }
  std::string name() const override { return "helicoid"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;
  double length_scale() const override { return a_; }
  std::vector<Vec> boundary_seeds(const Vec& x, int count) const override;
  std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const override;
  Box default_region() const override;
  std::vector<Chart> charts() const override;
  std::optional<std::vector<double>> analytic_curvatures(const Vec& p) const override;
  bool is_minimal() const override { return true; }

 private:
  double a_;
};

// Scherk's doubly periodic surface e^z cos x = cos y; phi = e^z cos x - cos y.
class ScherkDomain final : public CatalogSurface {
 public:
  ScherkDomain() = default;
  int dim() const override { return 3; }
  std::string name() const override { return "scherk"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;
  std::vector<Vec> boundary_seeds(const Vec& x, int count) const override;
  std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const override;
  Box default_region() const override;
  std::vector<Chart> charts() const override;
  bool is_minimal() const override { return true; }
};

// Enneper's surface has no embedded implicit form; only its chart is exposed.
Chart enneper_chart(double extent = 1.5);

using CatalogParams = std::map<std::string, double>;

// Builds a catalog domain by name: plane, sphere, cylinder, slab, catenoid,
// helicoid, scherk. Recognized parameters: dim, radius, half_width, scale.
DomainPtr make_domain(const std::string& name, const CatalogParams& params = {});
std::vector<std::string> catalog_names();

// Rejection-samples `count` chart points that fall inside `region`.
std::vector<Vec> sample_charts(const std::vector<Chart>& charts, const Box& region, int count, Rng& rng);

}  // namespace mcx
