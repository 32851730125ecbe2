#pragma once

// Hypersurfaces M = bOmega of implicit domains Omega = {phi < 0}: principal
// curvatures from the inner side and the m-convexity / m-flatness classifiers.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcx/numkit.hpp"
#include "mcx/rng.hpp"

namespace mcx {

struct Box {
  Vec lo;
  Vec hi;

  int dim() const noexcept { return lo.size(); }
  bool contains(const Vec& x) const noexcept;
  Vec center() const { return 0.5 * (lo + hi); }
  double diameter() const { return distance(lo, hi); }
  static Box cube(int n, double half_width);
};

// Domain Omega = {phi < 0} with phi evaluable together with its derivatives.
// The toolkit only needs phi near the boundary; gradient/hessian fall back to
// finite differences unless a subclass overrides them.
class ImplicitDomain : public Field {
 public:
  virtual std::string name() const = 0;
  bool contains(const Vec& x) const { return value(x) < 0.0; }

  // Characteristic length used to scale absolute tolerances.
  virtual double length_scale() const { return 1.0; }

  // Approximate boundary points near x that seed the nearest-point search.
  // The default is empty: only x itself is used as a start.
  virtual std::vector<Vec> boundary_seeds(const Vec& x, int count) const;

  // Up to `count` points of M inside `region`. Throws when the domain has no
  // boundary sampler.
  virtual std::vector<Vec> sample_boundary(const Box& region, int count, Rng& rng) const;

  // Reach known in closed form, if any (infinity for flat boundaries).
  virtual std::optional<double> declared_reach() const { return std::nullopt; }

  // Default region covering the interesting part of the boundary.
  virtual Box default_region() const;
};

// |grad phi| >= 1e-8 at every supplied boundary sample; returns the smallest
// gradient norm seen, throws SingularPointError otherwise.
double check_regular(const ImplicitDomain& domain, std::span<const Vec> boundary_samples);

struct SurfacePoint {
  Vec position;
  Vec inner_normal;                 // unit, pointing into Omega
  std::vector<double> curvatures;   // ascending, inner-side convention
  std::vector<Vec> directions;      // orthonormal, tangent, paired with curvatures
};

// Shape operator of {phi = 0} at p, restricted to T_pM. Rejects points with
// |phi(p)| > boundary_tol * length_scale and points where grad phi vanishes.
SurfacePoint principal_curvatures(const ImplicitDomain& domain, const Vec& p, double boundary_tol = 1e-8);

// Second-order jet of a parametrized surface patch in R^3.
struct SurfaceJet {
  Vec x, xu, xv, xuu, xuv, xvv;
};

// Curvatures from the first and second fundamental forms. The normal is
// xu x xv normalized, flipped to agree with `inner_hint` when one is given.
SurfacePoint parametric_curvatures(const SurfaceJet& jet, const std::optional<Vec>& inner_hint = std::nullopt);

// sigma_m = nu_1 + ... + nu_m; nonnegative iff M is m-convex at the point.
double m_convexity_defect(const SurfacePoint& sp, int m);

// |nu_j| <= tol for j = 1..m.
bool is_m_flat(const SurfacePoint& sp, int m, double tol);

struct FlatnessReport {
  std::size_t total = 0;
  std::size_t flat = 0;
  std::vector<Vec> flat_points;
  std::optional<Box> flat_bounding_box;
  std::size_t outside = 0;        // samples with |p| > radius
  std::size_t flat_outside = 0;
  double fraction_flat_outside = 0.0;
  double tolerance = 0.0;
  double radius = 0.0;
  // The boundedness of the m-flat set is a global property; samples can only
  // give evidence for it.
  bool sampled_evidence_only = true;
};

// `tol` defaults to 1e-6 * max(1, max |nu| over the samples).
FlatnessReport m_flatness_report(const ImplicitDomain& domain, std::span<const Vec> boundary_samples, int m,
                                 std::optional<double> tol, double radius);
FlatnessReport m_flatness_report(const ImplicitDomain& domain, const Box& region, int count, Rng& rng, int m,
                                 std::optional<double> tol, double radius);

}  // namespace mcx
