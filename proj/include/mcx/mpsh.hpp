#pragma once

// m-plurisubharmonicity: traces of a Hessian over m-planes and the sum of its
// m smallest eigenvalues, pointwise and over sample grids.

#include <optional>
#include <span>
#include <vector>

#include "mcx/numkit.hpp"
#include "mcx/rng.hpp"
#include "mcx/surfaces.hpp"

namespace mcx {

class MPlane {
 public:
  // Throws PreconditionError unless the basis is orthonormal to 1e-10.
  explicit MPlane(std::vector<Vec> basis);
  // Orthonormalizes an arbitrary spanning set first.
  static MPlane spanned_by(std::span<const Vec> vectors);

  int dim() const noexcept { return static_cast<int>(basis_.size()); }
  int ambient() const noexcept { return basis_.empty() ? 0 : basis_.front().size(); }
  const std::vector<Vec>& basis() const noexcept { return basis_; }

 private:
  std::vector<Vec> basis_;
};

// Orthonormalized Gaussian frame: uniform on the Grassmannian G(m, n).
MPlane random_plane(int n, int m, Rng& rng);

double trace_on_plane(const SymMatrix& h, const MPlane& plane);

// lambda_1 + ... + lambda_m.
double min_m_trace(const SymMatrix& h, int m);

// Plane attaining min_m_trace: span of the m lowest eigenvectors.
MPlane minimizing_plane(const SymMatrix& h, int m);

enum class PshKind { strict, psh, violated };
const char* to_string(PshKind k) noexcept;

struct PshVerdict {
  Vec x;
  double margin = 0.0;      // lambda_1 + ... + lambda_m
  double tolerance = 0.0;
  PshKind kind = PshKind::psh;
  std::optional<MPlane> worst_plane;
};

// tol defaults to 1e-8 * (1 + |H|_F).
PshVerdict classify(const SymMatrix& h, const Vec& x, int m, std::optional<double> tol = std::nullopt);
PshVerdict is_m_psh_at(const Field& rho, const Vec& x, int m, std::optional<double> tol = std::nullopt);

struct GridSpec {
  Box region;
  std::vector<int> counts;  // points per axis, each >= 1

  std::vector<Vec> points() const;
};

struct GridReport {
  std::size_t total = 0;
  std::size_t strict = 0;
  std::size_t psh = 0;
  std::size_t violated = 0;
  double worst_margin = 0.0;
  Vec worst_point;
  std::vector<PshVerdict> violations;  // capped at 100, lowest index first
};

// Any evaluation failure aborts with an Error whose locator is the sample.
GridReport grid_verdict(const Field& rho, std::span<const Vec> points, int m, std::optional<double> tol = std::nullopt,
                        int workers = 1);
GridReport grid_verdict(const Field& rho, const GridSpec& grid, int m, std::optional<double> tol = std::nullopt,
                        int workers = 1);

}  // namespace mcx
