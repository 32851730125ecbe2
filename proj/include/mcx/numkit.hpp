#pragma once

// Small dense linear algebra (n <= 8) and finite-difference differentiation.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "mcx/errors.hpp"

namespace mcx {

inline constexpr int kMaxDim = 8;

class Vec {
 public:
  Vec() = default;
  explicit Vec(int n, double fill = 0.0);
  Vec(std::initializer_list<double> values);
  static Vec unit(int n, int axis);
  static Vec from(std::span<const double> values);

  int size() const noexcept { return n_; }
  double& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  std::span<const double> data() const noexcept { return {c_.data(), static_cast<std::size_t>(n_)}; }
  std::vector<double> to_vector() const { return {c_.begin(), c_.begin() + n_}; }

  Vec& operator+=(const Vec& o) noexcept;
  Vec& operator-=(const Vec& o) noexcept;
  Vec& operator*=(double s) noexcept;
  Vec& operator/=(double s) noexcept;

  double dot(const Vec& o) const noexcept;
  double norm2() const noexcept { return dot(*this); }
  double norm() const noexcept { return std::sqrt(norm2()); }
  double max_abs() const noexcept;
  Vec normalized() const;
  bool all_finite() const noexcept;

  friend bool operator==(const Vec& a, const Vec& b) noexcept;

 private:
  std::array<double, kMaxDim> c_{};
  int n_ = 0;
};

Vec operator+(Vec a, const Vec& b) noexcept;
Vec operator-(Vec a, const Vec& b) noexcept;
Vec operator-(Vec a) noexcept;
Vec operator*(Vec a, double s) noexcept;
Vec operator*(double s, Vec a) noexcept;
Vec operator/(Vec a, double s) noexcept;
inline double dot(const Vec& a, const Vec& b) noexcept { return a.dot(b); }
double distance(const Vec& a, const Vec& b) noexcept;
Vec cross(const Vec& a, const Vec& b);

// Square n x n matrix, row-major.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n, double fill = 0.0);
  static Mat identity(int n);
  static Mat diagonal(const Vec& d);
  static Mat outer(const Vec& a, const Vec& b);

  int size() const noexcept { return n_; }
  double& operator()(int i, int j) noexcept { return a_[idx(i, j)]; }
  double operator()(int i, int j) const noexcept { return a_[idx(i, j)]; }

  Vec operator*(const Vec& v) const noexcept;
  Mat operator*(const Mat& o) const noexcept;
  Mat& operator+=(const Mat& o) noexcept;
  Mat& operator*=(double s) noexcept;
  Mat transposed() const noexcept;
  Vec column(int j) const noexcept;
  void set_column(int j, const Vec& v) noexcept;
  double frobenius() const noexcept;
  double max_asymmetry() const noexcept;

 private:
  std::size_t idx(int i, int j) const noexcept {
    return static_cast<std::size_t>(i * n_ + j);
  }
  std::array<double, kMaxDim * kMaxDim> a_{};
  int n_ = 0;
};

Mat operator+(Mat a, const Mat& b) noexcept;
Mat operator*(double s, Mat a) noexcept;

// Symmetric matrix. Construction from a general matrix rejects asymmetry beyond
// 1e-12 relative and stores the exact symmetrization.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : m_(n) {}
  explicit SymMatrix(const Mat& m, double rel_tol = 1e-12);
  static SymMatrix identity(int n) { return SymMatrix(Mat::identity(n)); }
  static SymMatrix diagonal(const Vec& d) { return SymMatrix(Mat::diagonal(d)); }
  // Sum of w_i * u_i u_i^T.
  static SymMatrix from_spectrum(std::span<const double> w, std::span<const Vec> u);

  int size() const noexcept { return m_.size(); }
  double operator()(int i, int j) const noexcept { return m_(i, j); }
  // Writes both (i,j) and (j,i).
  void set(int i, int j, double v) noexcept;
  const Mat& mat() const noexcept { return m_; }

  Vec operator*(const Vec& v) const noexcept { return m_ * v; }
  double quadratic(const Vec& u, const Vec& w) const noexcept { return u.dot(m_ * w); }
  double quadratic(const Vec& u) const noexcept { return quadratic(u, u); }
  double trace() const noexcept;
  double frobenius() const noexcept { return m_.frobenius(); }

  SymMatrix& operator+=(const SymMatrix& o) noexcept;
  SymMatrix& operator*=(double s) noexcept;
  // this += s * a a^T
  void add_outer(const Vec& a, double s = 1.0) noexcept;

 private:
  Mat m_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b) noexcept;
SymMatrix operator*(double s, SymMatrix a) noexcept;

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  std::vector<Vec> vectors;    // orthonormal, vectors[i] pairs with values[i]
};

// Cyclic Jacobi. Eigenvector signs are normalized so the first component with
// magnitude above 1e-12 is positive; ties in eigenvalue keep that order.
EigenDecomposition sym_eigen(const SymMatrix& a);

// Gaussian elimination with partial pivoting on an arbitrary-size dense system.
// Returns false when the matrix is numerically singular.
bool solve_dense(std::vector<double> a, std::vector<double>& b, int n);

// Orthonormal basis of the orthogonal complement of `normal` (unit), built
// deterministically from the coordinate axes.
std::vector<Vec> orthonormal_complement(const Vec& normal);

// Gram-Schmidt; throws PreconditionError when the input is rank deficient.
std::vector<Vec> orthonormalize(std::span<const Vec> basis, double tol = 1e-12);

using ScalarField = std::function<double(const Vec&)>;

// 1e-4 * (1 + |x|)
double default_fd_step(const Vec& x) noexcept;

Vec gradient_fd(const ScalarField& f, const Vec& x, double step);
SymMatrix hessian_fd(const ScalarField& f, const Vec& x, double step);

// A twice-differentiable scalar field. Derivatives default to central
// differences; override with closed forms when available.
class Field {
 public:
  virtual ~Field() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const;
  virtual SymMatrix hessian(const Vec& x) const;
  double operator()(const Vec& x) const { return value(x); }
  ScalarField as_function() const;
};

// Field from closures; missing derivatives fall back to finite differences.
class LambdaField final : public Field {
 public:
  LambdaField(int n, ScalarField f, std::function<Vec(const Vec&)> grad = {},
              std::function<SymMatrix(const Vec&)> hess = {});
  int dim() const override { return n_; }
  double value(const Vec& x) const override { return f_(x); }
  Vec gradient(const Vec& x) const override;
  SymMatrix hessian(const Vec& x) const override;

 private:
  int n_;
  ScalarField f_;
  std::function<Vec(const Vec&)> grad_;
  std::function<SymMatrix(const Vec&)> hess_;
};

std::string format_vec(const Vec& v);

}  // namespace mcx
