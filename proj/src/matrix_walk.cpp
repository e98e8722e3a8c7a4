#include "discwalk/matrix_walk.hpp"

#include "discwalk/errors.hpp"
#include "walk_common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace discwalk {

namespace {

// Keep eigenpairs above this fraction of the member's norm in the factorization.
constexpr double kFactorDrop = 1e-12;

}  // namespace

DoubledFamily::DoubledFamily(std::vector<SymMatrix> members) : members_(std::move(members)) {
  if (members_.empty()) return;
  n_ = members_.front().dim();
  std::vector<Vector> cols;
  for (Index i = 0; i < size(); ++i) {
    const SymMatrix& a = members_[i];
    if (a.dim() != n_) throw InvalidInput("DoubledFamily: members differ in dimension");
    if (!a.all_finite()) throw InvalidInput("DoubledFamily: non-finite member");
    const EigenDecomposition e = eigh(a);
    const double norm = n_ ? std::max(std::abs(e.values(0)), std::abs(e.values(n_ - 1))) : 0.0;
    const double drop = kFactorDrop * std::max(1.0, norm);
    for (Index k = 0; k < n_; ++k) {
      const double l = e.values(k);
      if (std::abs(l) <= drop) continue;
      cols.push_back(e.vectors.col(k) * std::sqrt(std::abs(l)));
      signs_.push_back(l > 0 ? 1.0 : -1.0);
      owner_.push_back(i);
    }
  }
  factors_.resize(n_, static_cast<Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) factors_.col(static_cast<Index>(k)) = cols[k];
  build_offsets();
}

DoubledFamily DoubledFamily::rank_one(const std::vector<Vector>& vectors, const Vector& scales) {
  std::vector<Matrix> f;
  f.reserve(vectors.size());
  for (const auto& v : vectors) f.emplace_back(v);
  return from_factors(f, scales);
}

DoubledFamily DoubledFamily::from_factors(const std::vector<Matrix>& factors, const Vector& scales) {
  if (static_cast<Index>(factors.size()) != scales.size())
    throw InvalidInput("from_factors: factor/scale count mismatch");
  DoubledFamily f;
  if (factors.empty()) return f;
  f.n_ = factors.front().rows();
  Index total = 0;
  for (const auto& F : factors) total += F.cols();
  f.factors_.resize(f.n_, total);
  Index at = 0;
  for (size_t i = 0; i < factors.size(); ++i) {
    const Index ii = static_cast<Index>(i);
    const Matrix& F = factors[i];
    if (F.rows() != f.n_) throw InvalidInput("from_factors: factors differ in dimension");
    if (!(scales(ii) >= 0) || !F.allFinite()) throw InvalidInput("from_factors: bad scale or factor");
    f.members_.push_back(SymMatrix::from_upper(scales(ii) * F * F.transpose()));
    const double r = std::sqrt(scales(ii));
    for (Index k = 0; k < F.cols(); ++k) {
      f.factors_.col(at++) = r * F.col(k);
      f.signs_.push_back(1.0);
      f.owner_.push_back(ii);
    }
  }
  f.build_offsets();
  return f;
}

void DoubledFamily::build_offsets() {
  offsets_.assign(members_.size() + 1, 0);
  for (Index o : owner_) ++offsets_[static_cast<size_t>(o) + 1];
  for (size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
}

SymMatrix DoubledFamily::doubled(Index i) const {
  return SymMatrix::block_diag(members_[i], -1.0 * members_[i]);
}

SymMatrix DoubledFamily::aggregate(const Vector& x) const {
  if (x.size() != size()) throw InvalidInput("aggregate: coloring length mismatch");
  Matrix acc = Matrix::Zero(n_, n_);
  for (Index i = 0; i < size(); ++i)
    if (x(i) != 0.0) acc += x(i) * members_[i].dense();
  return SymMatrix::from_upper(acc);
}

SymMatrix DoubledFamily::doubled_aggregate(const Vector& x) const {
  const SymMatrix a = aggregate(x);
  return SymMatrix::block_diag(a, -1.0 * a);
}

SymMatrix DoubledFamily::abs_sum() const {
  Matrix acc = Matrix::Zero(n_, n_);
  for (Index k = 0; k < factors_.cols(); ++k) acc += factors_.col(k) * factors_.col(k).transpose();
  return SymMatrix::from_upper(acc);
}

DoubledFamily DoubledFamily::scaled(const Vector& c) const {
  if (c.size() != size()) throw InvalidInput("scaled: length mismatch");
  DoubledFamily f = *this;
  for (Index i = 0; i < size(); ++i) {
    if (!(c(i) >= 0)) throw InvalidInput("scaled: negative scale");
    f.members_[i] *= c(i);
  }
  for (Index k = 0; k < factors_.cols(); ++k) f.factors_.col(k) *= std::sqrt(c(owner_[k]));
  return f;
}

DoubledFamily DoubledFamily::subset(std::span<const Index> idx) const {
  DoubledFamily f;
  f.n_ = n_;
  Index total = 0;
  for (Index i : idx) total += offsets_[i + 1] - offsets_[i];
  f.factors_.resize(n_, total);
  Index at = 0;
  for (size_t j = 0; j < idx.size(); ++j) {
    const Index i = idx[j];
    f.members_.push_back(members_[i]);
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      f.factors_.col(at++) = factors_.col(k);
      f.signs_.push_back(signs_[k]);
      f.owner_.push_back(static_cast<Index>(j));
    }
  }
  f.build_offsets();
  return f;
}

PotentialContext doubled_context(const SymMatrix& a, double eta) {
  const Index n = a.dim();
  if (n == 0) throw InvalidInput("doubled_context: empty matrix");
  const EigenDecomposition e = eigh(a);
  Vector vals(2 * n);
  vals << e.values, -e.values;
  std::vector<Index> order(2 * n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index p, Index q) { return vals(p) < vals(q); });

  PotentialContext ctx;
  ctx.eta = eta;
  ctx.A_of_x = SymMatrix::block_diag(a, -1.0 * a);
  ctx.eigenvalues.resize(2 * n);
  ctx.eigenvectors = Matrix::Zero(2 * n, 2 * n);
  for (Index j = 0; j < 2 * n; ++j) {
    const Index src = order[j];
    ctx.eigenvalues(j) = vals(src);
    if (src < n)
      ctx.eigenvectors.block(0, j, n, 1) = e.vectors.col(src);
    else
      ctx.eigenvectors.block(n, j, n, 1) = e.vectors.col(src - n);
  }
  ctx.u = solve_normalizer(ctx.eigenvalues, eta);
  ctx.M = ctx.M_power(1.0);
  return ctx;
}

namespace {

SymMatrix quad_impl(const Matrix& M, const Matrix& H, const DoubledFamily& f, std::span<const Index> active) {
  const Index n = f.dim();
  const Index ma = static_cast<Index>(active.size());
  if (M.rows() != 2 * n) throw InvalidInput("quad_matrix: density matrix must be 2n x 2n");
  const auto& offs = f.offsets();
  Index ra = 0;
  for (Index i : active) ra += offs[i + 1] - offs[i];
  Matrix fa(n, ra);
  Vector sig(ra);
  std::vector<Index> grp(static_cast<size_t>(ra));
  Index at = 0;
  for (Index j = 0; j < ma; ++j) {
    const Index i = active[j];
    for (Index k = offs[i]; k < offs[i + 1]; ++k) {
      fa.col(at) = f.factors().col(k);
      sig(at) = f.signs()[k];
      grp[at] = j;
      ++at;
    }
  }
  if (ra == 0) return SymMatrix(ma);

  auto blk = [n](const Matrix& X, Index p, Index q) { return X.block(p * n, q * n, n, n); };
  const Matrix fat = fa.transpose();
  Matrix P = (fat * blk(M, 0, 0) * fa).cwiseProduct(fat * blk(H, 0, 0) * fa);
  P += (fat * blk(M, 1, 1) * fa).cwiseProduct(fat * blk(H, 1, 1) * fa);
  if (!blk(M, 0, 1).isZero(0.0) || !blk(H, 0, 1).isZero(0.0)) {
    const Matrix c = (fat * blk(M, 0, 1) * fa).cwiseProduct(fat * blk(H, 0, 1) * fa);
    P -= c + c.transpose();
  }
  P = sig.asDiagonal() * P * sig.asDiagonal();
  if (ra == ma) return SymMatrix::from_upper(P);
  Matrix N = Matrix::Zero(ma, ma);
  for (Index l = 0; l < ra; ++l)
    for (Index k = 0; k < ra; ++k) N(grp[k], grp[l]) += P(k, l);
  return SymMatrix::from_upper(N);
}

}  // namespace

SymMatrix quad_matrix(const SymMatrix& M, const DoubledFamily& family, std::span<const Index> active) {
  const SymMatrix h = matrix_function(M, SpectralFunction::SqrtPsd);
  return quad_impl(M.dense(), h.dense(), family, active);
}

SymMatrix quad_matrix(const PotentialContext& ctx, const DoubledFamily& family, std::span<const Index> active) {
  return quad_impl(ctx.M.dense(), ctx.M_power(0.5).dense(), family, active);
}

Vector linear_row(const PotentialContext& ctx, const DoubledFamily& family, std::span<const Index> active) {
  const Index n = family.dim();
  const Matrix& M = ctx.M.dense();
  const Matrix& F = family.factors();
  const auto& offs = family.offsets();
  Vector row(static_cast<Index>(active.size()));
  for (size_t j = 0; j < active.size(); ++j) {
    const Index i = active[j];
    double acc = 0;
    for (Index k = offs[i]; k < offs[i + 1]; ++k) {
      const auto fk = F.col(k);
      const double top = fk.dot(M.topLeftCorner(n, n) * fk);
      const double bot = fk.dot(M.bottomRightCorner(n, n) * fk);
      acc += family.signs()[k] * (top - bot);
    }
    row(static_cast<Index>(j)) = acc;
  }
  return row;
}

namespace {

struct Direction {
  Vector y_active;
  Index low_count = 0;
  bool widened = false;
};

Direction choose_direction(const EigenDecomposition& eN, const Matrix& C, bool widen) {
  const Index ma = eN.values.size();
  Direction d;
  d.low_count = ma / 3;
  d.y_active = detail::constrained_direction(detail::low_eigvecs(eN, d.low_count), C);
  if (d.y_active.size() == 0 && widen) {
    const Index r = C.rows() ? nullspace(C).codim() : 0;
    const Index k = std::min(ma, r + 1);
    if (k > d.low_count) {
      d.low_count = k;
      d.widened = true;
      d.y_active = detail::constrained_direction(detail::low_eigvecs(eN, k), C);
    }
  }
  return d;
}

Matrix walk_constraints(const Vector& x_active, const Vector& lin, const Subspace& H,
                        std::span<const Index> active) {
  detail::RowStack rows(static_cast<Index>(active.size()));
  rows.add(x_active);
  rows.add(lin);
  if (H.codim() > 0) rows.add(detail::gather_cols(H.complement(), active));
  return rows.matrix();
}

}  // namespace

Subspace step_subspace(const ColoringState& state, const PotentialContext& ctx, const SymMatrix& N,
                       const Subspace& H, const DoubledFamily& family) {
  const Index m = state.x.size();
  const auto& active = state.active;
  const Index ma = static_cast<Index>(active.size());
  if (N.dim() != ma) throw InvalidInput("step_subspace: N does not match the active set");
  const Vector lin = linear_row(ctx, family, active);
  const Matrix C = walk_constraints(detail::gather(state.x, active), lin, H, active);
  const EigenDecomposition eN = eigh(N);
  const Matrix Q = detail::low_eigvecs(eN, ma / 3);
  if (Q.cols() == 0) throw SubspaceExhausted("step_subspace: empty low eigenspace");
  const Subspace inner = C.rows() ? nullspace(Matrix(C * Q)) : Subspace::full(Q.cols());
  if (inner.dim() == 0) throw SubspaceExhausted("step_subspace: empty intersection");
  const Matrix B = Q * inner.basis();
  Vector first = Q * inner.first_basis_vector();
  first.normalize();
  fix_sign(first);
  Matrix full = Matrix::Zero(m, B.cols());
  for (Index j = 0; j < ma; ++j) full.row(active[j]) = B.row(j);
  return span_of(full, m, detail::scatter(first, active, m));
}

double partial_color_bound(Index n, Index m) {
  return 16.0 * std::sqrt(2.0 * static_cast<double>(n) / static_cast<double>(m));
}

PartialColoring partial_color(const DoubledFamily& family, const Subspace& H, const PartialColorOptions& opt) {
  const Index m = family.size();
  const Index n = family.dim();
  if (m == 0 || n == 0) throw InvalidInput("partial_color: empty family");
  if (m < opt.min_size)
    throw InvalidInput("partial_color: " + std::to_string(m) + " members is below the minimum " +
                       std::to_string(opt.min_size));
  if (H.ambient_dim() != m) throw InvalidInput("partial_color: subspace ambient dimension mismatch");
  if (5 * H.dim() < 4 * m) throw InvalidInput("partial_color: subspace dimension below 4m/5");
  if (lambda_max(family.abs_sum()) > 1.0 + opt.input_tol)
    throw InvalidInput("partial_color: sum of |A_i| exceeds the identity");

  PartialColoring out;
  out.eta = opt.eta.value_or(std::sqrt(static_cast<double>(m)) / 4.0);
  out.alpha = opt.alpha.value_or(1.0 / (2.0 * out.eta));
  if (!(out.eta > 0) || !(out.alpha > 0)) throw InvalidInput("partial_color: eta and alpha must be positive");
  const double quad_bound_num = 9.0 * std::sqrt(2.0 * static_cast<double>(n));
  const Index max_iter = static_cast<Index>(std::ceil(m / (out.alpha * out.alpha))) + m + 1;

  Vector x = Vector::Zero(m);
  std::vector<Index> active = detail::active_set(x);
  Index t = 0;
  while (4 * static_cast<Index>(active.size()) > 3 * m) {
    if (t >= max_iter) throw SubspaceExhausted("partial_color: iteration budget exceeded");
    const Index ma = static_cast<Index>(active.size());
    const PotentialContext ctx = doubled_context(family.aggregate(x), out.eta);
    const SymMatrix N = quad_matrix(ctx, family, active);
    const Vector lin = linear_row(ctx, family, active);
    const Vector xa = detail::gather(x, active);
    const Matrix C = walk_constraints(xa, lin, H, active);
    const EigenDecomposition eN = eigh(N);
    const Direction dir = choose_direction(eN, C, opt.widen_when_empty);
    if (dir.y_active.size() == 0)
      throw SubspaceExhausted("partial_color: no admissible direction with " + std::to_string(ma) +
                              " active coordinates");
    const Vector y = detail::scatter(dir.y_active, active, m);

    WalkStepRecord rec;
    rec.t = t;
    rec.active_count = ma;
    rec.low_count = dir.low_count;
    rec.enlarged = dir.widened;
    rec.linear_term = lin.dot(dir.y_active);
    rec.quadratic_term = dir.y_active.dot(N.dense() * dir.y_active);
    rec.quadratic_bound = quad_bound_num / (static_cast<double>(ma) * static_cast<double>(ma));
    rec.norm_sq_before = x.squaredNorm();
    rec.potential_before = potential_value(ctx);
    rec.h_residual = H.residual(y);
    rec.x_dot_y = x.dot(y);

    rec.delta = detail::advance(x, y, out.alpha, opt.freeze_tol);
    rec.norm_sq_after = x.squaredNorm();
    rec.step_norm = step_norm(ctx, family.doubled_aggregate(rec.delta * y));
    if (rec.step_norm > 0.5 + 1e-9)
      throw StepTooLarge("partial_color: step norm " + std::to_string(rec.step_norm) + " exceeds 1/2");
    if (dir.widened) ++out.widened_steps;
    if (opt.observer) opt.observer(rec);
    active = detail::active_set(x);
    ++t;
  }

  out.x = x;
  out.iterations = t;
  out.frozen = detail::count_frozen(x);
  out.norm = operator_norm(family.aggregate(x));
  out.potential = potential_value(doubled_context(family.aggregate(x), out.eta));
  return out;
}

PartialColoring partial_color(const std::vector<SymMatrix>& family, const Subspace& H,
                              const PartialColorOptions& options) {
  return partial_color(DoubledFamily(family), H, options);
}

FullColoring complete_coloring(const DoubledFamily& family, const Subspace& H, const PartialColorOptions& opt) {
  const Index m = family.size();
  if (H.ambient_dim() != m) throw InvalidInput("complete_coloring: subspace ambient dimension mismatch");
  FullColoring out;
  out.x = Vector::Zero(m);
  std::vector<Index> rest(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) rest[static_cast<size_t>(i)] = i;
  while (!rest.empty()) {
    const Matrix rows = detail::gather_cols(H.complement(), rest);
    const Subspace Hr = rows.rows() ? nullspace(rows) : Subspace::full(static_cast<Index>(rest.size()));
    if (5 * Hr.dim() < 4 * static_cast<Index>(rest.size()))
      throw SubspaceExhausted("complete_coloring: restricted subspace below 4/5 of the remaining coordinates");
    const PartialColoring pc = partial_color(family.subset(rest), Hr, opt);
    if (out.rounds == 0) out.partial_norm = pc.norm;
    std::vector<Index> next;
    for (size_t j = 0; j < rest.size(); ++j) {
      const double v = pc.x(static_cast<Index>(j));
      if (std::abs(v) == 1.0)
        out.x(rest[j]) = v;
      else
        next.push_back(rest[j]);
    }
    rest = std::move(next);
    ++out.rounds;
  }
  out.norm = operator_norm(family.aggregate(out.x));
  return out;
}

FullColoring complete_coloring(const std::vector<SymMatrix>& family, const Subspace& H,
                               const PartialColorOptions& options) {
  return complete_coloring(DoubledFamily(family), H, options);
}

}  // namespace discwalk
