#pragma once

#include "discwalk/linalg.hpp"

#include <span>
#include <vector>

namespace discwalk::detail {

/// Coordinates with |x_i| < 1; frozen coordinates are stored exactly as +-1.
std::vector<Index> active_set(const Vector& x);
Index count_frozen(const Vector& x);

Vector gather(const Vector& v, std::span<const Index> idx);
Matrix gather_cols(const Matrix& rows, std::span<const Index> idx);
Vector scatter(const Vector& va, std::span<const Index> idx, Index m);

/// Moves x by delta*y with delta = min(cap, distance to the cube boundary),
/// clamps coordinates within freeze_tol of +-1 and returns delta.
double advance(Vector& x, const Vector& y, double cap, double freeze_tol);

/// Unit vector in span(Q) (orthonormal columns) orthogonal to every row of C,
/// or an empty vector when no such direction exists.
Vector constrained_direction(const Matrix& Q, const Matrix& C);

/// Rows (as a matrix) of the eigenvectors above the `keep` lowest ones.
Matrix top_eigvec_rows(const EigenDecomposition& e, Index keep);

/// Leading `keep` eigenvector columns.
Matrix low_eigvecs(const EigenDecomposition& e, Index keep);

class RowStack {
 public:
  explicit RowStack(Index width) : width_(width) {}
  void add(const Vector& row);
  void add(const Matrix& rows);
  Matrix matrix() const;
  Index width() const { return width_; }

 private:
  Index width_;
  std::vector<Matrix> blocks_;
};

}  // namespace discwalk::detail
