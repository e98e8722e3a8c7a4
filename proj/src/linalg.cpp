#include "discwalk/linalg.hpp"

#include "discwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

extern "C" {
void dsyevr_(const char* jobz, const char* range, const char* uplo, const int* n, double* a,
             const int* lda, const double* vl, const double* vu, const int* il, const int* iu,
             const double* abstol, int* m, double* w, double* z, const int* ldz, int* isuppz,
             double* work, const int* lwork, int* iwork, const int* liwork, int* info);
void openblas_set_num_threads(int) __attribute__((weak));
}

namespace discwalk {

namespace {

void pin_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (openblas_set_num_threads) openblas_set_num_threads(1);
  });
}

}  // namespace

SymMatrix SymMatrix::identity(Index n) {
  SymMatrix s(n);
  s.a_.setIdentity();
  return s;
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  SymMatrix s(d.size());
  s.a_.diagonal() = d;
  return s;
}

SymMatrix SymMatrix::from_upper(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("SymMatrix requires a square matrix");
  SymMatrix s;
  s.a_ = m;
  s.mirror();
  return s;
}

SymMatrix SymMatrix::outer(const Vector& v, double scale) {
  SymMatrix s(v.size());
  s.add_outer(v, scale);
  return s;
}

SymMatrix SymMatrix::block_diag(const SymMatrix& a, const SymMatrix& b) {
  SymMatrix s(a.dim() + b.dim());
  s.a_.topLeftCorner(a.dim(), a.dim()) = a.a_;
  s.a_.bottomRightCorner(b.dim(), b.dim()) = b.a_;
  return s;
}

void SymMatrix::add_outer(const Vector& v, double scale) {
  const Index n = dim();
  for (Index j = 0; j < n; ++j) {
    const double vj = scale * v(j);
    for (Index i = 0; i <= j; ++i) a_(i, j) += v(i) * vj;
  }
  mirror();
}

SymMatrix SymMatrix::principal(std::span<const Index> idx) const {
  const Index k = static_cast<Index>(idx.size());
  SymMatrix s(k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) s.a_(i, j) = a_(idx[i], idx[j]);
  s.mirror();
  return s;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  a_ += o.a_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  a_ -= o.a_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double c) {
  a_ *= c;
  return *this;
}

void SymMatrix::mirror() {
  const Index n = dim();
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) a_(i, j) = a_(j, i);
}

void fix_sign(Eigen::Ref<Vector> v, double tol) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

EigenDecomposition eigh(const SymMatrix& a) {
  if (!a.all_finite()) throw InvalidInput("eigh: non-finite entry");
  pin_blas_threads();
  const int n = static_cast<int>(a.dim());
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (n == 0) return out;

  Matrix work_a = a.dense();
  const char jobz = 'V', range = 'A', uplo = 'U';
  const double vl = 0, vu = 0, abstol = std::numeric_limits<double>::min();
  const int il = 0, iu = 0;
  int found = 0, info = 0;
  std::vector<int> isuppz(2 * static_cast<size_t>(n));
  int lwork = -1, liwork = -1, iwork_query = 0;
  double work_query = 0;
  dsyevr_(&jobz, &range, &uplo, &n, work_a.data(), &n, &vl, &vu, &il, &iu, &abstol, &found,
          out.values.data(), out.vectors.data(), &n, isuppz.data(), &work_query, &lwork,
          &iwork_query, &liwork, &info);
  lwork = static_cast<int>(work_query);
  liwork = iwork_query;
  std::vector<double> work(static_cast<size_t>(lwork));
  std::vector<int> iwork(static_cast<size_t>(liwork));
  dsyevr_(&jobz, &range, &uplo, &n, work_a.data(), &n, &vl, &vu, &il, &iu, &abstol, &found,
          out.values.data(), out.vectors.data(), &n, isuppz.data(), work.data(), &lwork,
          iwork.data(), &liwork, &info);
  if (info != 0 || found != n) throw InvalidInput("eigh: LAPACK dsyevr failed");
  for (int j = 0; j < n; ++j) fix_sign(out.vectors.col(j));
  return out;
}

SymMatrix spectral_apply(const EigenDecomposition& e, const std::function<double(double)>& f) {
  const Index n = e.values.size();
  Vector fl(n);
  for (Index i = 0; i < n; ++i) fl(i) = f(e.values(i));
  Matrix vf = e.vectors * fl.asDiagonal();
  return SymMatrix::from_upper(vf * e.vectors.transpose());
}

double zero_threshold(const EigenDecomposition& e) {
  double norm = 0;
  if (e.values.size() > 0) norm = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
  return 1e-10 * std::max(1.0, norm);
}

SymMatrix matrix_function(const SymMatrix& a, SpectralFunction f) {
  const EigenDecomposition e = eigh(a);
  const double thr = zero_threshold(e);
  const double norm = e.values.size() ? std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1))) : 0.0;
  auto check_psd = [&] {
    if (e.values.size() && e.values(0) < -1e-8 * norm)
      throw NotPSD("matrix has eigenvalue " + std::to_string(e.values(0)));
  };
  switch (f) {
    case SpectralFunction::Abs:
      return spectral_apply(e, [](double l) { return std::abs(l); });
    case SpectralFunction::SqrtPsd:
      check_psd();
      return spectral_apply(e, [](double l) { return l > 0 ? std::sqrt(l) : 0.0; });
    case SpectralFunction::Pinv:
      return spectral_apply(e, [thr](double l) { return std::abs(l) <= thr ? 0.0 : 1.0 / l; });
    case SpectralFunction::PinvSqrt:
      check_psd();
      return spectral_apply(e, [thr](double l) { return l <= thr ? 0.0 : 1.0 / std::sqrt(l); });
  }
  throw InvalidInput("unknown spectral function");
}

double operator_norm(const SymMatrix& a) {
  if (a.dim() == 0) return 0;
  const Vector v = eigh(a).values;
  return std::max(std::abs(v(0)), std::abs(v(v.size() - 1)));
}

double lambda_max(const SymMatrix& a) {
  const Vector v = eigh(a).values;
  return v(v.size() - 1);
}

double lambda_min(const SymMatrix& a) { return eigh(a).values(0); }

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0;
  if (!a.allFinite()) throw InvalidInput("spectral_norm: non-finite entry");
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

Matrix kernel_basis(const SymMatrix& a) {
  const EigenDecomposition e = eigh(a);
  const double thr = zero_threshold(e);
  std::vector<Index> cols;
  for (Index i = 0; i < e.values.size(); ++i)
    if (std::abs(e.values(i)) <= thr) cols.push_back(i);
  Matrix k(a.dim(), static_cast<Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) k.col(static_cast<Index>(j)) = e.vectors.col(cols[j]);
  return k;
}

Subspace::Subspace(Index m, Matrix complement, Vector first)
    : m_(m), c_(std::move(complement)), first_(std::move(first)) {
  if (c_.cols() != m_) throw InvalidInput("Subspace: complement width mismatch");
  if (first_.size() == 0 && c_.rows() < m_) {
    if (c_.rows() == 0) {
      first_ = Vector::Unit(m_, 0);
    } else {
      Eigen::HouseholderQR<Matrix> qr(c_.transpose());
      Matrix q = qr.householderQ() * Matrix::Identity(m_, c_.rows() + 1);
      first_ = q.col(c_.rows());
      fix_sign(first_);
    }
  }
}

double Subspace::residual(const Vector& y) const {
  if (c_.rows() == 0) return 0;
  return (c_ * y).norm();
}

bool Subspace::contains(const Vector& y, double tol) const { return residual(y) <= tol; }

Vector Subspace::project(const Vector& y) const {
  if (c_.rows() == 0) return y;
  return y - c_.transpose() * (c_ * y);
}

Matrix Subspace::basis() const {
  if (c_.rows() == 0) return Matrix::Identity(m_, m_);
  Eigen::HouseholderQR<Matrix> qr(c_.transpose());
  Matrix q = qr.householderQ() * Matrix::Identity(m_, m_);
  Matrix b = q.rightCols(m_ - c_.rows());
  for (Index j = 0; j < b.cols(); ++j) fix_sign(b.col(j));
  return b;
}

Subspace nullspace(const Matrix& rows) {
  const Index m = rows.cols();
  if (!rows.allFinite()) throw InvalidInput("nullspace: non-finite row");
  double max_norm = 0;
  for (Index i = 0; i < rows.rows(); ++i) max_norm = std::max(max_norm, rows.row(i).norm());
  const double drop = 1e-12 * std::max(1.0, max_norm);
  std::vector<Index> keep;
  for (Index i = 0; i < rows.rows(); ++i)
    if (rows.row(i).norm() > drop) keep.push_back(i);
  if (keep.empty()) return Subspace::full(m);

  Matrix cols(m, static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) {
    const Index i = keep[j];
    cols.col(static_cast<Index>(j)) = rows.row(i).transpose() / rows.row(i).norm();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(cols);
  const Index kmax = std::min(m, cols.cols());
  Index rank = 0;
  const auto& r = qr.matrixR();
  while (rank < kmax && std::abs(r(rank, rank)) > 1e-10) ++rank;
  const Index want = std::min(m, rank + 1);
  Matrix q = qr.householderQ() * Matrix::Identity(m, want);
  Matrix complement = q.leftCols(rank).transpose();
  Vector first;
  if (rank < m) {
    first = q.col(rank);
    fix_sign(first);
  }
  return Subspace(m, std::move(complement), std::move(first));
}

Subspace nullspace(std::span<const Vector> rows, Index m) {
  Matrix r(static_cast<Index>(rows.size()), m);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m) throw InvalidInput("nullspace: row length mismatch");
    r.row(static_cast<Index>(i)) = rows[i].transpose();
  }
  return nullspace(r);
}

Subspace intersect(std::span<const Subspace> parts) {
  if (parts.empty()) throw InvalidInput("intersect: no subspaces");
  const Index m = parts.front().ambient_dim();
  Index total = 0;
  for (const auto& p : parts) {
    if (p.ambient_dim() != m) throw InvalidInput("intersect: ambient dimension mismatch");
    total += p.codim();
  }
  Matrix rows(total, m);
  Index at = 0;
  for (const auto& p : parts) {
    rows.middleRows(at, p.codim()) = p.complement();
    at += p.codim();
  }
  return nullspace(rows);
}

Subspace span_of(const Matrix& basis, Index m, const Vector& first) {
  if (basis.cols() == 0) return Subspace(m, Matrix::Identity(m, m));
  if (basis.rows() != m) throw InvalidInput("span_of: basis height mismatch");
  const Subspace perp = nullspace(Matrix(basis.transpose()));
  Matrix comp = perp.dim() > 0 ? Matrix(perp.basis().transpose()) : Matrix(0, m);
  Vector f = first;
  if (f.size() == 0) {
    f = basis.col(0).normalized();
    fix_sign(f);
  }
  return Subspace(m, std::move(comp), std::move(f));
}

}  // namespace discwalk
