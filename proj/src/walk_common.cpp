#include "walk_common.hpp"

#include <cmath>

namespace discwalk::detail {

std::vector<Index> active_set(const Vector& x) {
  std::vector<Index> a;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) < 1.0) a.push_back(i);
  return a;
}

Index count_frozen(const Vector& x) {
  Index c = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) >= 1.0) ++c;
  return c;
}

Vector gather(const Vector& v, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out(static_cast<Index>(k)) = v(idx[k]);
  return out;
}

Matrix gather_cols(const Matrix& rows, std::span<const Index> idx) {
  Matrix out(rows.rows(), static_cast<Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = rows.col(idx[k]);
  return out;
}

Vector scatter(const Vector& va, std::span<const Index> idx, Index m) {
  Vector out = Vector::Zero(m);
  for (size_t k = 0; k < idx.size(); ++k) out(idx[k]) = va(static_cast<Index>(k));
  return out;
}

double advance(Vector& x, const Vector& y, double cap, double freeze_tol) {
  double delta = cap;
  Index hit = -1;
  for (Index i = 0; i < x.size(); ++i) {
    if (y(i) == 0.0) continue;
    const double room = (y(i) > 0 ? 1.0 - x(i) : -1.0 - x(i)) / y(i);
    if (room < delta) {
      delta = room;
      hit = i;
    }
  }
  delta = std::max(delta, 0.0);
  x += delta * y;
  if (hit >= 0) x(hit) = y(hit) > 0 ? 1.0 : -1.0;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) >= 1.0 - freeze_tol) x(i) = x(i) > 0 ? 1.0 : -1.0;
  return delta;
}

Vector constrained_direction(const Matrix& Q, const Matrix& C) {
  if (Q.cols() == 0) return Vector();
  Vector v;
  if (C.rows() == 0) {
    v = Q.col(0);
  } else {
    const Subspace s = nullspace(C * Q);
    if (s.dim() == 0) return Vector();
    v = Q * s.first_basis_vector();
  }
  v.normalize();
  fix_sign(v);
  return v;
}

Matrix top_eigvec_rows(const EigenDecomposition& e, Index keep) {
  const Index n = e.values.size();
  return e.vectors.rightCols(n - keep).transpose();
}

Matrix low_eigvecs(const EigenDecomposition& e, Index keep) { return e.vectors.leftCols(keep); }

void RowStack::add(const Vector& row) { blocks_.push_back(row.transpose()); }

void RowStack::add(const Matrix& rows) {
  if (rows.rows() > 0) blocks_.push_back(rows);
}

Matrix RowStack::matrix() const {
  Index total = 0;
  for (const auto& b : blocks_) total += b.rows();
  Matrix out(total, width_);
  Index at = 0;
  for (const auto& b : blocks_) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace discwalk::detail
