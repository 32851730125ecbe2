#include "mcx/mpsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcx/parallel.hpp"

namespace mcx {

MPlane::MPlane(std::vector<Vec> basis) : basis_(std::move(basis)) {
  if (basis_.empty()) throw PreconditionError("MPlane: empty basis");
  const int n = basis_.front().size();
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i].size() != n) throw PreconditionError("MPlane: mixed dimensions");
    for (std::size_t j = i; j < basis_.size(); ++j) {
      const double d = basis_[i].dot(basis_[j]);
      if (std::abs(d - (i == j ? 1.0 : 0.0)) > 1e-10) {
        throw PreconditionError("MPlane: basis is not orthonormal (<b" + std::to_string(i) + ", b" +
                                    std::to_string(j) + "> = " + std::to_string(d) + ")",
                                {static_cast<double>(i), static_cast<double>(j), d});
      }
    }
  }
  if (static_cast<int>(basis_.size()) > n) throw PreconditionError("MPlane: more basis vectors than dimensions");
}

MPlane MPlane::spanned_by(std::span<const Vec> vectors) { return MPlane(orthonormalize(vectors)); }

MPlane random_plane(int n, int m, Rng& rng) {
  if (m < 1 || m > n) throw PreconditionError("random_plane: m out of range");
  for (;;) {
    std::vector<Vec> g;
    for (int i = 0; i < m; ++i) g.push_back(rng.normal_vec(n));
    try {
      return MPlane::spanned_by(g);
    } catch (const PreconditionError&) {
      // rank-deficient draw; probability zero, redraw
    }
  }
}

double trace_on_plane(const SymMatrix& h, const MPlane& plane) {
  if (plane.ambient() != h.size()) throw PreconditionError("trace_on_plane: dimension mismatch");
  double s = 0.0;
  for (const Vec& b : plane.basis()) s += h.quadratic(b);
  return s;
}

double min_m_trace(const SymMatrix& h, int m) {
  if (m < 1 || m > h.size()) {
    throw PreconditionError("min_m_trace: m = " + std::to_string(m) + " out of range [1, " +
                            std::to_string(h.size()) + "]");
  }
  const EigenDecomposition e = sym_eigen(h);
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += e.values[static_cast<std::size_t>(i)];
  return s;
}

MPlane minimizing_plane(const SymMatrix& h, int m) {
  if (m < 1 || m > h.size()) throw PreconditionError("minimizing_plane: m out of range");
  EigenDecomposition e = sym_eigen(h);
  e.vectors.resize(static_cast<std::size_t>(m));
  return MPlane::spanned_by(e.vectors);
}

const char* to_string(PshKind k) noexcept {
  switch (k) {
    case PshKind::strict: return "strictly-psh";
    case PshKind::psh: return "psh";
    case PshKind::violated: return "violated";
  }
  return "?";
}

PshVerdict classify(const SymMatrix& h, const Vec& x, int m, std::optional<double> tol) {
  if (m < 1 || m > h.size()) throw PreconditionError("is_m_psh_at: m out of range");
  const EigenDecomposition e = sym_eigen(h);
  PshVerdict v;
  v.x = x;
  for (int i = 0; i < m; ++i) v.margin += e.values[static_cast<std::size_t>(i)];
  v.tolerance = tol.value_or(1e-8 * (1.0 + h.frobenius()));
  if (v.margin > v.tolerance) {
    v.kind = PshKind::strict;
  } else if (v.margin >= -v.tolerance) {
    v.kind = PshKind::psh;
  } else {
    v.kind = PshKind::violated;
  }
  std::vector<Vec> low(e.vectors.begin(), e.vectors.begin() + m);
  v.worst_plane = MPlane::spanned_by(low);
  return v;
}

PshVerdict is_m_psh_at(const Field& rho, const Vec& x, int m, std::optional<double> tol) {
  return classify(rho.hessian(x), x, m, tol);
}

std::vector<Vec> GridSpec::points() const {
  const int n = region.dim();
  if (static_cast<int>(counts.size()) != n) throw PreconditionError("GridSpec: counts must match the dimension");
  std::size_t total = 1;
  for (int c : counts) {
    if (c < 1) throw PreconditionError("GridSpec: counts must be >= 1");
    total *= static_cast<std::size_t>(c);
  }
  std::vector<Vec> pts;
  pts.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < total; ++k) {
    Vec p(n);
    for (int i = 0; i < n; ++i) {
      const int c = counts[static_cast<std::size_t>(i)];
      const double f = c == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(i)]) / (c - 1);
      p[i] = region.lo[i] + f * (region.hi[i] - region.lo[i]);
    }
    pts.push_back(p);
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < counts[static_cast<std::size_t>(i)]) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  return pts;
}

GridReport grid_verdict(const Field& rho, std::span<const Vec> points, int m, std::optional<double> tol,
                        int workers) {
  std::vector<PshVerdict> verdicts(points.size());
  parallel_for(points.size(), workers, [&](std::size_t i) {
    try {
      verdicts[i] = is_m_psh_at(rho, points[i], m, tol);
    } catch (const Error& e) {
      throw Error(std::string("grid sample ") + std::to_string(i) + " at " + format_vec(points[i]) + ": " + e.what(),
                  points[i].to_vector());
    }
  });
  GridReport r;
  r.total = points.size();
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (const PshVerdict& v : verdicts) {
    switch (v.kind) {
      case PshKind::strict: ++r.strict; break;
      case PshKind::psh: ++r.psh; break;
      case PshKind::violated:
        ++r.violated;
        if (r.violations.size() < 100) r.violations.push_back(v);
        break;
    }
    if (v.margin < r.worst_margin) {
      r.worst_margin = v.margin;
      r.worst_point = v.x;
    }
  }
  return r;
}

GridReport grid_verdict(const Field& rho, const GridSpec& grid, int m, std::optional<double> tol, int workers) {
  const std::vector<Vec> pts = grid.points();
  return grid_verdict(rho, pts, m, tol, workers);
}

}  // namespace mcx
