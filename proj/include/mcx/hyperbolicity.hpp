#pragma once

// Upper bounds for the minimal pseudometric from affine discs, the
// Beltrami-Cayley-Klein metric of the unit ball, the domains Omega_D and a
// classifier for finite intersections of halfspaces.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mcx/numkit.hpp"
#include "mcx/rng.hpp"
#include "mcx/surfaces.hpp"

namespace mcx {

struct DiscSearchSpec {
  int orientations = 8;              // coarse samples of the plane through p containing v
  double orientation_tol = 1e-3;     // radians, golden-section refinement
  int offset_grid = 7;               // coarse offset grid per axis
  int offset_rounds = 2;             // coordinate golden-section sweeps over the offset
  int golden_iterations = 25;
  int rays = 64;                     // rays per containment radius
  int ray_bisections = 40;
  double max_radius = 1e3;           // relative to length_scale
  int lattice_radii = 32;            // certification lattice
  int lattice_angles = 64;
  int circle_samples = 1000;         // certification points on the boundary circle
  double margin = 1e-9;              // phi <= -margin at every certification sample
  int workers = 1;
};

// Disc f(zeta) = center + R (Re(m(zeta)) e1 + Im(m(zeta)) e2) with m the disc
// automorphism sending 0 to (p - center) / R; then f(0) = p and
// f_x(0) = r v with r = (R^2 - |p - center|^2) / (R |v|).
struct MetricEstimate {
  Vec p, v;
  double bound = std::numeric_limits<double>::infinity();  // 1 / r
  bool found = false;
  Vec e1, e2;                        // orthonormal plane, e1 = v / |v|
  Vec center;
  double radius = 0.0;               // R
  Vec offset;                        // p - center
  std::size_t certified_samples = 0;
  std::string qualifier;             // "upper bound only" unless the domain is a ball
  std::string diagnostic;
};

// Throws PreconditionError when p is not in Omega or v = 0.
MetricEstimate metric_upper_bound(const ImplicitDomain& domain, const Vec& p, const Vec& v,
                                  const DiscSearchSpec& spec = {});

// Klein-model length sqrt(|v|^2 / (1 - |p|^2) + (p.v)^2 / (1 - |p|^2)^2) on the unit ball.
double bck_metric(const Vec& p, const Vec& v);

// artanh(|w1 - w2| / |1 - conj(w1) w2|) on the unit disc.
double poincare_distance(double x1, double y1, double x2, double y2);

// {|z| < 1, z^2 (x^2 + y^2) < 1, (x, y) in D when z = 0}.
class OmegaD {
 public:
  explicit OmegaD(std::function<bool(double, double)> slice, std::string name = "D",
                  std::vector<std::pair<double, double>> omitted = {});
  bool contains(const Vec& x) const;
  bool slice_contains(double x, double y) const { return slice_(x, y); }
  const std::string& name() const { return name_; }
  // Points declared missing from D (two of them make Omega_D weakly hyperbolic).
  const std::vector<std::pair<double, double>>& omitted() const { return omitted_; }

 private:
  std::function<bool(double, double)> slice_;
  std::string name_;
  std::vector<std::pair<double, double>> omitted_;
};

bool omega_d_membership(const OmegaD& dom, const Vec& x);

struct ChainSpec {
  double vertical_radius = 0.5;      // halved until the vertical disc fits
  double min_radius = 1e-6;
  int diameter_samples = 401;        // slice membership checks along the z = 0 diameter
  int lattice_radii = 32;
  int lattice_angles = 64;
};

struct ChainBound {
  double total = 0.0;
  double vertical_p = 0.0;
  double vertical_q = 0.0;
  double horizontal = 0.0;
  double radius_p = 0.0;             // vertical disc radii actually used
  double radius_q = 0.0;
  int k = 0;
};

// Upper bound for the distance between p and q in the z = 0 slice: vertical
// discs p -> p + (0, 0, 1/k) and q -> q + (0, 0, 1/k) joined by the
// horizontal disc of radius k at height 1/k.
ChainBound omega_d_distance_chain(const OmegaD& dom, const Vec& p, const Vec& q, int k, const ChainSpec& spec = {});

// Omega = intersection of {l_j . x < c_j}.
struct HalfspaceIntersection {
  std::vector<Vec> functionals;
  std::vector<double> bounds;

  int dim() const;
  bool contains(const Vec& x) const;
  // Smallest c_j - l_j . x; positive inside.
  double slack(const Vec& x) const;
};

struct ConvexClassification {
  int n = 0;
  int rank = 0;                      // dimension of span{l_j}
  std::vector<double> gram_eigenvalues;  // of sum l_j l_j^T, ascending
  bool contains_2plane = false;
  Vec base;                          // supplied interior point
  std::optional<std::pair<Vec, Vec>> plane;  // directions of an exhibited 2-plane
  std::size_t plane_checks = 0;      // sampled points of the exhibited plane, all inside
  std::size_t trials = 0;            // random 2-planes through the base point
  std::size_t trials_exited = 0;     // of those, leaving Omega within trial_radius
  double max_exit_radius = 0.0;
  double trial_radius = 1e6;
  bool complete_hyperbolic = false;  // no 2-plane in a convex domain
};

// Throws PreconditionError when `interior` is not strictly inside or some
// functional vanishes.
ConvexClassification convex_contains_2plane(const HalfspaceIntersection& h, const Vec& interior, Rng& rng,
                                            int trials = 10000, double trial_radius = 1e6);

}  // namespace mcx
