#pragma once

// m-plurisubharmonic defining function rho = c * chi(h(delta)) built from the
// signed distance on a collar of M.

#include <memory>
#include <optional>
#include <vector>

#include "mcx/checks.hpp"
#include "mcx/mpsh.hpp"
#include "mcx/tubular.hpp"

namespace mcx {

// h(t) = (exp(alpha t) - 1) / alpha.
struct ConvexProfile {
  double alpha = 0.0;
  int m = 0;
  double epsilon = 0.0;

  double h(double t) const { return std::expm1(alpha * t) / alpha; }
  double hdot(double t) const { return std::exp(alpha * t); }
  double hddot(double t) const { return alpha * std::exp(alpha * t); }
  // Inverse of h on (-1/alpha, +inf).
  double inverse(double y) const;
};

// Requires alpha > (m - 1) / epsilon strictly.
ConvexProfile make_profile(double alpha, int m, double epsilon);

// max(2 (m - 1) / epsilon, 1 / epsilon).
double default_alpha(int m, double epsilon);

struct CollarRatios {
  double eps0 = 0.9;  // eps0 / eps0'
  double eps2 = 0.6;  // eps2 / eps0
  double eps1 = 0.3;  // eps1 / eps0
};

// Largest t with hddot(-t) > (m - 1) / epsilon; infinite when m = 1.
double profile_radius(const ConvexProfile& profile);

// eps0' = safety * min(epsilon / 2, t*) with 0 < safety < 1, then the ratios.
TubularCollar choose_collar(const ConvexProfile& profile, double epsilon, double safety = 0.99,
                            const CollarRatios& ratios = {});

// Increasing convex function, constant below lo() and the identity above hi().
class Cap {
 public:
  virtual ~Cap() = default;
  virtual double lo() const = 0;
  virtual double hi() const = 0;
  virtual double chi(double t) const = 0;
  virtual double chi_dot(double t) const = 0;
  virtual double chi_ddot(double t) const = 0;
};

// chi_dot is the degree-3 (or degree-5) smoothstep on [lo, hi].
class SmoothingCap final : public Cap {
 public:
  SmoothingCap(double lo, double hi, int degree = 3);
  double lo() const override { return a_; }
  double hi() const override { return b_; }
  int degree() const { return degree_; }
  double chi(double t) const override;
  double chi_dot(double t) const override;
  double chi_ddot(double t) const override;

 private:
  double a_, b_, w_, base_;
  int degree_;
};

// Cap on [h(-eps2), h(-eps1)]; checks chi_ddot >= 0 at 10^3 interior samples.
std::shared_ptr<const Cap> make_cap(const TubularCollar& collar, const ConvexProfile& profile, int degree = 3);

// h(delta) on the collar C_eps0, h(-eps0) deeper inside.
double rho0(const ImplicitDomain& domain, const TubularCollar& collar, const ConvexProfile& profile, const Vec& x);

struct BarrierSample {
  double delta = 0.0;
  double rho0 = 0.0;
  double value = 0.0;
  bool plateau = false;              // chi is constant here: gradient and Hessian vanish
  Vec gradient;
  SymMatrix hessian;
  std::vector<double> eigen_list;    // c chi' h' nu_j(x) for j < n, then c (chi' h'' + chi'' h'^2)
};

class BarrierFunction final : public Field {
 public:
  BarrierFunction(std::shared_ptr<const ImplicitDomain> domain, TubularCollar collar, ConvexProfile profile,
                  std::shared_ptr<const Cap> cap, int m);

  int dim() const override { return domain_->dim(); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;

  // Value plus, unless value_only, the analytic derivatives at x.
  BarrierSample evaluate(const Vec& x, bool value_only = false) const;
  std::vector<double> eigenvalue_list(const Vec& x) const { return evaluate(x).eigen_list; }

  // delta on the level set {rho = t}, for t in (-1, 0].
  double level_depth(double t) const;
  double plateau_value() const { return c_ * cap_->chi(cap_->lo()); }
  double scale() const { return c_; }
  int m() const { return m_; }

  const ImplicitDomain& domain() const { return *domain_; }
  const TubularCollar& collar() const { return collar_; }
  const ConvexProfile& profile() const { return profile_; }
  const Cap& cap() const { return *cap_; }

 private:
  std::shared_ptr<const ImplicitDomain> domain_;
  TubularCollar collar_;
  ConvexProfile profile_;
  std::shared_ptr<const Cap> cap_;
  int m_;
  double c_;
};

struct BarrierOptions {
  std::optional<double> alpha;       // default_alpha(m, epsilon) when absent
  double safety = 0.99;
  CollarRatios ratios;
  int cap_degree = 3;
  std::optional<double> reach;       // overrides declared/estimated reach
  int convexity_samples = 200;       // boundary samples for the m-convexity check
  std::optional<Box> region;         // defaults to the domain's region
  std::uint64_t seed = 1;
  ProjectionSettings projection;
};

// Rejects domains that are not m-convex at some sample (PreconditionError with
// the point and sigma_m) and epsilon above the reach.
BarrierFunction build_barrier(std::shared_ptr<const ImplicitDomain> domain, int m, double epsilon,
                              const BarrierOptions& options = {});

struct BarrierVerifySpec {
  std::vector<Vec> interior;         // samples in the closure of Omega
  std::vector<Vec> boundary;         // samples on M
  int levels = 10;                   // level sets probed in (-1, 0)
  int level_rays = 16;               // normal rays per level
  double psh_tol = 1e-8;
  double boundary_tol = 1e-8;
  double eigen_tol = 1e-5;
  double level_tol = 1e-6;
  double gradient_floor = 1e-6;      // times c
  int workers = 1;
};

// Grid of `counts` over `region` restricted to {phi <= 0}, plus boundary samples.
BarrierVerifySpec make_verify_spec(const BarrierFunction& bf, const GridSpec& grid, int boundary_count, Rng& rng);

struct BarrierVerifyReport {
  std::vector<CheckRecord> checks;
  std::vector<CheckRecord> failures;  // individual failing samples, capped
  GridReport grid;
  bool pass() const { return all_pass(checks); }
};

BarrierVerifyReport verify_barrier(const BarrierFunction& bf, const BarrierVerifySpec& spec);

}  // namespace mcx
