#include "discwalk/vector_walk.hpp"

#include "discwalk/errors.hpp"
#include "walk_common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace discwalk {

ConstraintSet::ConstraintSet(const std::vector<Vector>& a, Index m) : m_(m), given_(static_cast<Index>(a.size())) {
  std::vector<Index> keep;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != m) throw InvalidInput("constraint vector length mismatch");
    if (!a[i].allFinite()) throw InvalidInput("constraint vector has non-finite entries");
    if (a[i].norm() > 1e-12) keep.push_back(static_cast<Index>(i));
  }
  unit_.resize(static_cast<Index>(keep.size()), m);
  norms_.resize(static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) {
    const Vector& v = a[static_cast<size_t>(keep[j])];
    norms_(static_cast<Index>(j)) = v.norm();
    unit_.row(static_cast<Index>(j)) = v.transpose() / v.norm();
  }
  kept_ = std::move(keep);
}

double mwu_lambda0(Index k, Index m) {
  if (k <= 0 || m <= 0) return 1.0;
  const double l = std::log(static_cast<double>(k) / static_cast<double>(m));
  return std::max(1.0, std::sqrt(std::max(0.0, l)));
}

MwuWeights mwu_weights(const ConstraintSet& cs, const Vector& x, double lambda0) {
  const Vector p = cs.unit() * x;
  MwuWeights w;
  w.plus.resize(p.size());
  w.minus.resize(p.size());
  const double l2 = lambda0 * lambda0;
  for (Index i = 0; i < p.size(); ++i) {
    w.plus(i) = std::exp(lambda0 * p(i) - l2);
    w.minus(i) = std::exp(-lambda0 * p(i) - l2);
  }
  return w;
}

MwuStepData mwu_step_data(const ConstraintSet& cs, const MwuWeights& w, std::span<const Index> active, Index heavy) {
  const Index ma = static_cast<Index>(active.size());
  const Index k = cs.size();
  MwuStepData out;
  detail::RowStack rows(ma);
  if (k == 0) {
    out.rows = rows.matrix();
    return out;
  }
  out.has_constraints = true;
  const Matrix ua = detail::gather_cols(cs.unit(), active);  // k x ma
  const Vector c = w.total();
  rows.add(Vector(ua.transpose() * (w.plus - w.minus)));

  std::vector<Index> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return c(a) > c(b); });
  const Index h = std::min(heavy, k);
  Matrix hv(h, ma);
  for (Index j = 0; j < h; ++j) hv.row(j) = ua.row(order[j]);
  rows.add(hv);
  out.rows = rows.matrix();

  const Vector scale = (c / c.sum()).cwiseSqrt();
  const Matrix b = scale.asDiagonal() * ua;
  out.W = eigh(SymMatrix::from_upper(b.transpose() * b));
  return out;
}

namespace {

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

struct VectorStepInputs {
  Matrix Q;  // basis of the low W eigenspace (active coordinates)
  Matrix C;  // constraint rows (active coordinates)
};

VectorStepInputs vector_step_inputs(const ConstraintSet& cs, const MwuWeights& w, const Vector& x,
                                    std::span<const Index> active, const Subspace& extra) {
  const Index ma = static_cast<Index>(active.size());
  const MwuStepData data = mwu_step_data(cs, w, active, ceil_div(ma, 10));
  VectorStepInputs in;
  in.Q = data.has_constraints ? detail::low_eigvecs(data.W, (9 * ma) / 10) : Matrix(Matrix::Identity(ma, ma));
  detail::RowStack rows(ma);
  rows.add(detail::gather(x, active));
  rows.add(data.rows);
  if (extra.codim() > 0) rows.add(detail::gather_cols(extra.complement(), active));
  in.C = rows.matrix();
  return in;
}

}  // namespace

Subspace mwu_subspace(const MwuState& state, const ConstraintSet& cs, const Subspace& extra) {
  const Index m = state.x.size();
  if (extra.ambient_dim() != m || cs.dim() != m) throw InvalidInput("mwu_subspace: dimension mismatch");
  const VectorStepInputs in = vector_step_inputs(cs, state.weights, state.x, state.active, extra);
  if (in.Q.cols() == 0) throw SubspaceExhausted("mwu_subspace: empty eigenspace");
  const Subspace inner = in.C.rows() ? nullspace(Matrix(in.C * in.Q)) : Subspace::full(in.Q.cols());
  if (inner.dim() == 0) throw SubspaceExhausted("mwu_subspace: empty intersection");
  const Matrix B = in.Q * inner.basis();
  Vector first = in.Q * inner.first_basis_vector();
  first.normalize();
  fix_sign(first);
  Matrix full = Matrix::Zero(m, B.cols());
  for (size_t j = 0; j < state.active.size(); ++j) full.row(state.active[j]) = B.row(static_cast<Index>(j));
  return span_of(full, m, detail::scatter(first, state.active, m));
}

VectorColoring vector_partial_color(const std::vector<Vector>& a, const Subspace& extra, const VectorWalkOptions& opt) {
  const Index m = extra.ambient_dim();
  const Index k = static_cast<Index>(a.size());
  if (m == 0) throw InvalidInput("vector_partial_color: empty coloring space");
  if (k < m && !opt.allow_fewer_constraints)
    throw InvalidInput("vector_partial_color: need at least as many constraints as coordinates");
  const ConstraintSet cs(a, m);

  VectorColoring out;
  out.lambda0 = mwu_lambda0(k, m);
  out.alpha = opt.alpha.value_or(1.0 / (2.0 * out.lambda0));
  if (!(out.alpha > 0)) throw InvalidInput("vector_partial_color: alpha must be positive");
  const Index max_iter = static_cast<Index>(std::ceil(m / (out.alpha * out.alpha))) + m + 1;

  Vector x = Vector::Zero(m);
  std::vector<Index> active = detail::active_set(x);
  Index t = 0;
  while (4 * static_cast<Index>(active.size()) > 3 * m) {
    if (t >= max_iter) throw SubspaceExhausted("vector_partial_color: iteration budget exceeded");
    const MwuWeights w = mwu_weights(cs, x, out.lambda0);
    const VectorStepInputs in = vector_step_inputs(cs, w, x, active, extra);
    const Vector ya = detail::constrained_direction(in.Q, in.C);
    if (ya.size() == 0)
      throw SubspaceExhausted("vector_partial_color: no admissible direction with " +
                              std::to_string(active.size()) + " active coordinates");
    const Vector y = detail::scatter(ya, active, m);

    VectorStepRecord rec;
    rec.t = t;
    rec.active_count = static_cast<Index>(active.size());
    rec.norm_sq_before = x.squaredNorm();
    rec.extra_residual = extra.residual(y);
    rec.x_dot_y = x.dot(y);
    rec.delta = detail::advance(x, y, out.alpha, opt.freeze_tol);
    rec.norm_sq_after = x.squaredNorm();
    rec.admissibility = cs.size() ? out.lambda0 * rec.delta * (cs.unit() * y).cwiseAbs().maxCoeff() : 0.0;
    if (opt.observer) opt.observer(rec);
    active = detail::active_set(x);
    ++t;
  }

  out.x = x;
  out.iterations = t;
  out.frozen = detail::count_frozen(x);
  const double scale = mwu_lambda0(k, m);
  for (Index i = 0; i < k; ++i) {
    const double na = a[static_cast<size_t>(i)].norm();
    if (na > 1e-12)
      out.max_discrepancy_ratio = std::max(out.max_discrepancy_ratio, std::abs(a[static_cast<size_t>(i)].dot(x)) / (na * scale));
  }
  return out;
}

}  // namespace discwalk
