#include "mcx/numkit.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace mcx {

// ---------------------------------------------------------------------------
// Vec

Vec::Vec(int n, double fill) : n_(n) {
  if (n < 0 || n > kMaxDim) throw PreconditionError("Vec dimension out of range: " + std::to_string(n));
  std::fill(c_.begin(), c_.begin() + n, fill);
}

Vec::Vec(std::initializer_list<double> values) : n_(static_cast<int>(values.size())) {
  if (n_ > kMaxDim) throw PreconditionError("Vec dimension out of range: " + std::to_string(n_));
  std::copy(values.begin(), values.end(), c_.begin());
}

Vec Vec::unit(int n, int axis) {
  Vec v(n);
  v[axis] = 1.0;
  return v;
}

Vec Vec::from(std::span<const double> values) {
  Vec v(static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), v.c_.begin());
  return v;
}

Vec& Vec::operator+=(const Vec& o) noexcept {
  for (int i = 0; i < n_; ++i) c_[i] += o.c_[i];
  return *this;
}
Vec& Vec::operator-=(const Vec& o) noexcept {
  for (int i = 0; i < n_; ++i) c_[i] -= o.c_[i];
  return *this;
}
Vec& Vec::operator*=(double s) noexcept {
  for (int i = 0; i < n_; ++i) c_[i] *= s;
  return *this;
}
Vec& Vec::operator/=(double s) noexcept {
  for (int i = 0; i < n_; ++i) c_[i] /= s;
  return *this;
}

double Vec::dot(const Vec& o) const noexcept {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += c_[i] * o.c_[i];
  return s;
}

double Vec::max_abs() const noexcept {
  double m = 0.0;
  for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(c_[i]));
  return m;
}

Vec Vec::normalized() const {
  const double len = norm();
  if (!(len > 0.0)) throw PreconditionError("cannot normalize a zero vector");
  return *this / len;
}

bool Vec::all_finite() const noexcept {
  for (int i = 0; i < n_; ++i)
    if (!std::isfinite(c_[i])) return false;
  return true;
}

bool operator==(const Vec& a, const Vec& b) noexcept {
  if (a.n_ != b.n_) return false;
  for (int i = 0; i < a.n_; ++i)
    if (a.c_[i] != b.c_[i]) return false;
  return true;
}

Vec operator+(Vec a, const Vec& b) noexcept { return a += b; }
Vec operator-(Vec a, const Vec& b) noexcept { return a -= b; }
Vec operator-(Vec a) noexcept { return a *= -1.0; }
Vec operator*(Vec a, double s) noexcept { return a *= s; }
Vec operator*(double s, Vec a) noexcept { return a *= s; }
Vec operator/(Vec a, double s) noexcept { return a /= s; }

double distance(const Vec& a, const Vec& b) noexcept { return (a - b).norm(); }

Vec cross(const Vec& a, const Vec& b) {
  if (a.size() != 3 || b.size() != 3) throw PreconditionError("cross product needs 3-vectors");
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// ---------------------------------------------------------------------------
// Mat

Mat::Mat(int n, double fill) : n_(n) {
  if (n < 0 || n > kMaxDim) throw PreconditionError("Mat dimension out of range: " + std::to_string(n));
  std::fill(a_.begin(), a_.begin() + n * n, fill);
}

Mat Mat::identity(int n) {
  Mat m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diagonal(const Vec& d) {
  Mat m(d.size());
  for (int i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Mat Mat::outer(const Vec& a, const Vec& b) {
  Mat m(a.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

Vec Mat::operator*(const Vec& v) const noexcept {
  Vec r(n_);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Mat Mat::operator*(const Mat& o) const noexcept {
  Mat r(n_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (int j = 0; j < n_; ++j) r(i, j) += a * o(k, j);
    }
  return r;
}

Mat& Mat::operator+=(const Mat& o) noexcept {
  for (int i = 0; i < n_ * n_; ++i) a_[i] += o.a_[i];
  return *this;
}

Mat& Mat::operator*=(double s) noexcept {
  for (int i = 0; i < n_ * n_; ++i) a_[i] *= s;
  return *this;
}

Mat Mat::transposed() const noexcept {
  Mat t(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Vec Mat::column(int j) const noexcept {
  Vec c(n_);
  for (int i = 0; i < n_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Mat::set_column(int j, const Vec& v) noexcept {
  for (int i = 0; i < n_; ++i) (*this)(i, j) = v[i];
}

double Mat::frobenius() const noexcept {
  double s = 0.0;
  for (int i = 0; i < n_ * n_; ++i) s += a_[i] * a_[i];
  return std::sqrt(s);
}

double Mat::max_asymmetry() const noexcept {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

Mat operator+(Mat a, const Mat& b) noexcept { return a += b; }
Mat operator*(double s, Mat a) noexcept { return a *= s; }

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(const Mat& m, double rel_tol) : m_(m.size()) {
  const double asym = m.max_asymmetry();
  double scale = 0.0;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) scale = std::max(scale, std::abs(m(i, j)));
  if (!(asym <= rel_tol * std::max(scale, std::numeric_limits<double>::min()))) {
    throw AsymmetricMatrixError("matrix is not symmetric: max |a_ij - a_ji| = " + std::to_string(asym), asym);
  }
  const int n = m.size();
  for (int i = 0; i < n; ++i) {
    m_(i, i) = m(i, i);
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
  }
}

SymMatrix SymMatrix::from_spectrum(std::span<const double> w, std::span<const Vec> u) {
  if (u.empty()) throw PreconditionError("from_spectrum needs at least one vector");
  SymMatrix s(u.front().size());
  for (std::size_t k = 0; k < u.size(); ++k) s.add_outer(u[k], w[k]);
  return s;
}

void SymMatrix::set(int i, int j, double v) noexcept {
  m_(i, j) = v;
  m_(j, i) = v;
}

double SymMatrix::trace() const noexcept {
  double t = 0.0;
  for (int i = 0; i < size(); ++i) t += m_(i, i);
  return t;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) noexcept {
  m_ += o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) noexcept {
  m_ *= s;
  return *this;
}

void SymMatrix::add_outer(const Vec& a, double s) noexcept {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const double ai = s * a[i];
    m_(i, i) += ai * a[i];
    for (int j = i + 1; j < n; ++j) {
      const double v = ai * a[j];
      m_(i, j) += v;
      m_(j, i) += v;
    }
  }
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) noexcept { return a += b; }
SymMatrix operator*(double s, SymMatrix a) noexcept { return a *= s; }

// ---------------------------------------------------------------------------
// Jacobi eigensolver

EigenDecomposition sym_eigen(const SymMatrix& a) {
  const int n = a.size();
  if (n < 1 || n > kMaxDim) throw PreconditionError("sym_eigen: dimension out of range");
  Mat m = a.mat();
  Mat v = Mat::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(m(i, j))) throw PreconditionError("sym_eigen: non-finite entry");

  const double scale = std::max(m.frobenius(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (std::sqrt(off) <= 1e-17 * scale) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double app = m(p, p);
        const double aqq = m(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        m(p, q) = 0.0;
        m(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return m(i, i) < m(j, j); });

  EigenDecomposition out;
  out.values.reserve(static_cast<std::size_t>(n));
  out.vectors.reserve(static_cast<std::size_t>(n));
  for (int idx : order) {
    Vec col = v.column(idx);
    for (int k = 0; k < n; ++k) {
      if (std::abs(col[k]) > 1e-12) {
        if (col[k] < 0.0) col *= -1.0;
        break;
      }
    }
    out.values.push_back(m(idx, idx));
    out.vectors.push_back(col);
  }
  return out;
}

bool solve_dense(std::vector<double> a, std::vector<double>& b, int n) {
  const auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * n + j)]; };
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return false;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
    if (std::abs(at(piv, col)) <= 1e-14 * scale) return false;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(at(col, j), at(piv, j));
      std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(piv)]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = at(r, col) / at(col, col);
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) at(r, j) -= f * at(col, j);
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int j = r + 1; j < n; ++j) s -= at(r, j) * b[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(r)] = s / at(r, r);
  }
  return true;
}

std::vector<Vec> orthonormal_complement(const Vec& normal) {
  const int n = normal.size();
  std::vector<Vec> basis;
  basis.reserve(static_cast<std::size_t>(n - 1));
  // Seed with axes ordered by how little they overlap the normal.
  std::vector<int> axes(static_cast<std::size_t>(n));
  std::iota(axes.begin(), axes.end(), 0);
  std::stable_sort(axes.begin(), axes.end(),
                   [&](int i, int j) { return std::abs(normal[i]) < std::abs(normal[j]); });
  for (int axis : axes) {
    if (static_cast<int>(basis.size()) == n - 1) break;
    Vec e = Vec::unit(n, axis);
    // Two Gram-Schmidt passes for orthogonality at machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      e -= e.dot(normal) * normal;
      for (const Vec& b : basis) e -= e.dot(b) * b;
    }
    const double len = e.norm();
    if (len < 1e-8) continue;
    basis.push_back(e / len);
  }
  return basis;
}

std::vector<Vec> orthonormalize(std::span<const Vec> basis, double tol) {
  std::vector<Vec> out;
  out.reserve(basis.size());
  for (const Vec& b : basis) {
    Vec e = b;
    const double scale = b.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : out) e -= e.dot(q) * q;
    const double len = e.norm();
    if (!(len > tol * std::max(scale, 1.0))) throw PreconditionError("orthonormalize: basis is rank deficient");
    out.push_back(e / len);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite differences

double default_fd_step(const Vec& x) noexcept { return 1e-4 * (1.0 + x.norm()); }

namespace {

double eval_checked(const ScalarField& f, const Vec& x) {
  double v = 0.0;
  try {
    v = f(x);
  } catch (const std::exception& e) {
    throw FieldEvaluationError(std::string("field evaluation failed at ") + format_vec(x) + ": " + e.what(),
                               x.to_vector());
  }
  if (!std::isfinite(v)) {
    throw FieldEvaluationError("field returned a non-finite value at " + format_vec(x), x.to_vector());
  }
  return v;
}

void check_step(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw PreconditionError("finite-difference step must be positive");
}

}  // namespace

Vec gradient_fd(const ScalarField& f, const Vec& x, double step) {
  check_step(step);
  const int n = x.size();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x;
    Vec xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (eval_checked(f, xp) - eval_checked(f, xm)) / (2.0 * step);
  }
  return g;
}

SymMatrix hessian_fd(const ScalarField& f, const Vec& x, double step) {
  check_step(step);
  const int n = x.size();
  const double f0 = eval_checked(f, x);
  SymMatrix h(n);
  const double h2 = step * step;
  for (int i = 0; i < n; ++i) {
    Vec xp = x;
    Vec xm = x;
    xp[i] += step;
    xm[i] -= step;
    h.set(i, i, (eval_checked(f, xp) - 2.0 * f0 + eval_checked(f, xm)) / h2);
    for (int j = i + 1; j < n; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp[i] += step, pp[j] += step;
      pm[i] += step, pm[j] -= step;
      mp[i] -= step, mp[j] += step;
      mm[i] -= step, mm[j] -= step;
      const double v = (eval_checked(f, pp) - eval_checked(f, pm) - eval_checked(f, mp) + eval_checked(f, mm)) /
                       (4.0 * h2);
      h.set(i, j, v);
    }
  }
  return h;
}

Vec Field::gradient(const Vec& x) const {
  return gradient_fd([this](const Vec& y) { return value(y); }, x, default_fd_step(x));
}

SymMatrix Field::hessian(const Vec& x) const {
  return hessian_fd([this](const Vec& y) { return value(y); }, x, default_fd_step(x));
}

ScalarField Field::as_function() const {
  return [this](const Vec& y) { return value(y); };
}

LambdaField::LambdaField(int n, ScalarField f, std::function<Vec(const Vec&)> grad,
                         std::function<SymMatrix(const Vec&)> hess)
    : n_(n), f_(std::move(f)), grad_(std::move(grad)), hess_(std::move(hess)) {}

Vec LambdaField::gradient(const Vec& x) const { return grad_ ? grad_(x) : Field::gradient(x); }

SymMatrix LambdaField::hessian(const Vec& x) const { return hess_ ? hess_(x) : Field::hessian(x); }

std::string format_vec(const Vec& v) {
  std::string s = "(";
  char buf[32];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g", v[i]);
    if (i) s += ", ";
    s += buf;
  }
  return s + ")";
}

}  // namespace mcx
