#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace discwalk {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense real symmetric matrix. Every mutation mirrors the upper triangle
/// into the lower one, so entry(i,j) and entry(j,i) are bitwise equal.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Index n) : a_(Matrix::Zero(n, n)) {}

  static SymMatrix zero(Index n) { return SymMatrix(n); }
  static SymMatrix identity(Index n);
  static SymMatrix diagonal(const Vector& d);
  /// Symmetric matrix built from the upper triangle of `m`.
  static SymMatrix from_upper(const Matrix& m);
  /// scale * v v^T
  static SymMatrix outer(const Vector& v, double scale = 1.0);
  /// diag(a, b)
  static SymMatrix block_diag(const SymMatrix& a, const SymMatrix& b);

  Index dim() const { return a_.rows(); }
  double operator()(Index i, Index j) const { return a_(i, j); }
  void set(Index i, Index j, double v) {
    a_(i, j) = v;
    a_(j, i) = v;
  }
  const Matrix& dense() const { return a_; }

  void add_outer(const Vector& v, double scale);
  SymMatrix principal(std::span<const Index> idx) const;
  double trace() const { return a_.trace(); }
  bool all_finite() const { return a_.allFinite(); }

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double c);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double c) { return a *= c; }
  friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }

 private:
  void mirror();
  Matrix a_;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

/// Symmetric eigendecomposition. Eigenvalues ascending; each eigenvector has
/// its first entry with magnitude above 1e-12 positive.
EigenDecomposition eigh(const SymMatrix& a);

/// V diag(f(lambda)) V^T
SymMatrix spectral_apply(const EigenDecomposition& e, const std::function<double(double)>& f);

enum class SpectralFunction { Abs, SqrtPsd, Pinv, PinvSqrt };

SymMatrix matrix_function(const SymMatrix& a, SpectralFunction f);

/// Eigenvalues with |lambda| <= zero_threshold are treated as zero.
double zero_threshold(const EigenDecomposition& e);

double operator_norm(const SymMatrix& a);
double lambda_max(const SymMatrix& a);
double lambda_min(const SymMatrix& a);

/// Largest singular value of a general matrix.
double spectral_norm(const Matrix& a);

/// Orthonormal basis (columns) of the numerical kernel.
Matrix kernel_basis(const SymMatrix& a);

/// Subspace of R^m stored through an orthonormal basis of its orthogonal
/// complement.
class Subspace {
 public:
  Subspace() = default;
  static Subspace full(Index m) { return Subspace(m, Matrix(0, m)); }
  /// `complement` rows must already be orthonormal.
  Subspace(Index m, Matrix complement, Vector first = Vector());

  Index ambient_dim() const { return m_; }
  Index dim() const { return m_ - c_.rows(); }
  Index codim() const { return c_.rows(); }
  const Matrix& complement() const { return c_; }

  bool contains(const Vector& y, double tol) const;
  double residual(const Vector& y) const;
  Vector project(const Vector& y) const;
  /// Orthonormal basis of the subspace itself (columns).
  Matrix basis() const;
  /// First column of basis(); empty vector when dim() == 0.
  const Vector& first_basis_vector() const { return first_; }

 private:
  Index m_ = 0;
  Matrix c_;
  Vector first_;
};

/// {y : <row, y> = 0 for all rows}; rows are the rows of `rows`.
Subspace nullspace(const Matrix& rows);
Subspace nullspace(std::span<const Vector> rows, Index m);
Subspace intersect(std::span<const Subspace> parts);
/// Subspace spanned by the columns of `basis`; `first` (optional) fixes the
/// vector reported by first_basis_vector().
Subspace span_of(const Matrix& basis, Index m, const Vector& first = Vector());

/// Flip the sign of v so its first entry above `tol` in magnitude is positive.
void fix_sign(Eigen::Ref<Vector> v, double tol = 1e-12);

}  // namespace discwalk
