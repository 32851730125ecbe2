#pragma once

// Signed distance to M, nearest-point projection, curvature transport along
// normals and reach estimation.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mcx/surfaces.hpp"

namespace mcx {

struct ProjectionSettings {
  int starts = 16;            // x itself plus boundary_seeds(x, starts - 1)
  double tol = 1e-10;         // position tolerance, relative to length_scale
  double separation = 1e-6;   // distinct feet are farther apart than this (relative)
  int max_descent = 200;
  int max_newton = 40;
};

struct ProjectionResult {
  Vec foot;
  double delta = 0.0;           // < 0 inside Omega
  int multiplicity = 1;         // distinct minimizers found
  double residual = 0.0;        // |phi(foot)| / |grad phi(foot)|
  std::vector<Vec> feet;        // all distinct minimizers, foot first
};

// Nearest point on M by multi-start descent on |y - x|^2 over {phi = 0}
// followed by a Newton polish of the Lagrange system.
ProjectionResult signed_distance(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& settings = {});

// nu_j / (1 + t nu_j) for each curvature of sp; FocalPointError when some
// denominator is not positive.
std::vector<double> transport_curvatures(const SurfacePoint& sp, double t);

// Everything known about delta at x with a unique foot.
struct DistanceJet {
  ProjectionResult projection;
  SurfacePoint foot;                // curvatures at xi(x)
  Vec gradient;                     // unit outward normal at xi(x)
  std::vector<double> transported;  // nu_j(x), ascending
  SymMatrix hessian;                // sum_j nu_j(x) v_j v_j^T
};

// Throws NonUniqueFootError when the foot is not unique, FocalPointError when x
// sits at or beyond a focal point of its foot.
DistanceJet distance_jet(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& settings = {});
// Same, reusing a projection already computed for x.
DistanceJet distance_jet(const ImplicitDomain& domain, ProjectionResult projection);
Vec grad_delta(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& settings = {});
SymMatrix hessian_delta(const ImplicitDomain& domain, const Vec& x, const ProjectionSettings& settings = {});

// Radii of the collar used by the barrier: 0 < eps1 < eps2 < eps0 < eps0p < reach / 2.
struct TubularCollar {
  double reach = 0.0;
  double eps0p = 0.0;
  double eps0 = 0.0;
  double eps2 = 0.0;
  double eps1 = 0.0;
  ProjectionSettings projection;

  // Throws PreconditionError naming the first violated inequality.
  void validate() const;
};

struct ReachSettings {
  int probe_count = 48;         // boundary samples probed along both normal rays
  double probe_length = 4.0;    // ray length, relative to length_scale
  int march_steps = 32;
  int bisection_steps = 40;
  double switch_tol = 1e-5;     // foot moved farther than this (relative) => switched
  int workers = 1;
  ProjectionSettings projection;
};

struct ReachEstimate {
  double value = 0.0;        // min(focal_bound, probe_bound)
  double focal_bound = std::numeric_limits<double>::infinity();
  double probe_bound = std::numeric_limits<double>::infinity();
  Vec focal_witness;         // sample with the largest |nu|
  Vec probe_witness;         // ray point where the foot first switched
  std::size_t samples = 0;
  std::string qualifier;     // describes the sampled region
};

// Lower-bound estimate of the reach from boundary samples. The probe bound is
// the smallest distance along a normal ray at which the nearest point stops
// being the ray's origin, i.e. the distance to the medial axis.
ReachEstimate reach_estimate(const ImplicitDomain& domain, std::span<const Vec> boundary_samples,
                             const ReachSettings& settings = {});

struct BoundViolation {
  Vec point;
  double value;       // offending curvature (or negative-part sum)
  double threshold;
  std::string which;  // "upper", "lower" or "negative-part"
};

struct CurvatureBoundsReport {
  std::size_t checked = 0;
  double epsilon = 0.0;
  int m = 0;
  double upper_margin = std::numeric_limits<double>::infinity();          // min 1/eps - nu_max
  double lower_margin = std::numeric_limits<double>::infinity();          // min nu_min + (m-1)/eps
  double negative_part_margin = std::numeric_limits<double>::infinity();  // min sum_{nu<=0} nu + (m-1)/eps
  double tolerance = 0.0;
  std::vector<BoundViolation> violations;
  bool pass() const { return violations.empty(); }
};

// -(m-1)/eps <= nu_j <= 1/eps and sum over nonpositive nu_j >= -(m-1)/eps at
// every sample. eps may be infinite (flat boundary).
CurvatureBoundsReport curvature_bounds_check(const ImplicitDomain& domain, double epsilon, int m,
                                             std::span<const Vec> boundary_samples);

}  // namespace mcx
