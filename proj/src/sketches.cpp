#include "discwalk/sketches.hpp"

#include "discwalk/errors.hpp"
#include "discwalk/matrix_walk.hpp"
#include "discwalk/potential.hpp"
#include "discwalk/sparsify.hpp"
#include "walk_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace discwalk {

Vector shift_center(const Vector& z, const Graph& g) {
  if (g.n() == 0) throw InvalidInput("shift_center: empty graph");
  if (z.size() != g.n()) throw InvalidInput("shift_center: vector length mismatch");
  const Vector d = g.degrees();
  const double total = d.sum();
  if (total <= 0) return z;
  return z - Vector::Constant(z.size(), d.dot(z) / total);
}

FreezeSets freeze_sets(const Graph& g, const Vector& s) {
  if (s.size() != g.edge_count()) throw InvalidInput("freeze_sets: weight vector length mismatch");
  const Index n = g.n();
  Vector d = Vector::Zero(n), ds = Vector::Zero(n);
  Index mt = 0;
  for (Index i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edge(i);
    d(e.u) += 1;
    d(e.v) += 1;
    if (s(i) > 0) {
      ds(e.u) += 1;
      ds(e.v) += 1;
      ++mt;
    }
  }
  const double low_cut = 0.1 * static_cast<double>(mt) / static_cast<double>(n);
  FreezeSets out;
  for (Index i = 0; i < g.edge_count(); ++i) {
    if (!(s(i) > 0)) continue;
    const Edge& e = g.edge(i);
    if (s(i) > 10.0 * d(e.u) / ds(e.u) || s(i) > 10.0 * d(e.v) / ds(e.v))
      out.high.push_back(i);
    else if (ds(e.u) <= low_cut || ds(e.v) <= low_cut)
      out.low.push_back(i);
    else
      out.free.push_back(i);
  }
  return out;
}

double quadratic_ratio_error(const SymMatrix& L1, const SymMatrix& L2, const std::vector<Vector>& K) {
  const Matrix& a = L1.dense();
  const Matrix& b = L2.dense();
  const double scale = std::max(1.0, operator_norm(L1));
  double worst = 0;
  for (const auto& z : K) {
    const double q1 = z.dot(a * z);
    if (q1 <= 1e-12 * scale * z.squaredNorm()) continue;
    worst = std::max(worst, std::abs(z.dot(b * z) / q1 - 1.0));
  }
  return worst;
}

namespace {

void require_simple_undirected(const Graph& g, const char* what) {
  if (g.directed()) throw InvalidInput(std::string(what) + ": undirected graph required");
  for (const auto& e : g.edges())
    if (e.w != 1.0) throw InvalidInput(std::string(what) + ": unweighted graph required");
}

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

// One halving round on a piece: assembles a_z over supp(s), the extra
// subspace (degrees and frozen edges), then checks and applies a coloring.
class HalvingRound {
 public:
  HalvingRound(const Graph& g, const Vector& s, const std::vector<Vector>& zbar, const Vector& dquad)
      : g_(g), zbar_(zbar), dquad_(dquad) {
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > 0) S_.push_back(i);
    mt_ = static_cast<Index>(S_.size());
    sets_ = freeze_sets(g, s);
    st_ = detail::gather(s, S_);

    std::vector<Index> local(static_cast<size_t>(g.edge_count()), -1);
    for (Index j = 0; j < mt_; ++j) local[static_cast<size_t>(S_[j])] = j;
    std::vector<char> is_free(static_cast<size_t>(mt_), 0);
    for (Index i : sets_.free) is_free[static_cast<size_t>(local[static_cast<size_t>(i)])] = 1;

    a_.reserve(zbar.size());
    for (const auto& z : zbar) {
      Vector a = Vector::Zero(mt_);
      for (Index j = 0; j < mt_; ++j) {
        if (!is_free[static_cast<size_t>(j)]) continue;
        const Edge& e = g.edge(S_[j]);
        a(j) = st_(j) * z(e.u) * z(e.v);
      }
      a_.push_back(std::move(a));
    }

    detail::RowStack rows(mt_);
    rows.add(Matrix(detail::gather_cols(degree_rows(g, s), S_)));
    Matrix frozen = Matrix::Zero(static_cast<Index>(sets_.high.size() + sets_.low.size()), mt_);
    Index r = 0;
    for (Index i : sets_.high) frozen(r++, local[static_cast<size_t>(i)]) = 1;
    for (Index i : sets_.low) frozen(r++, local[static_cast<size_t>(i)]) = 1;
    rows.add(frozen);
    extra_ = nullspace(rows.matrix());
  }

  Index size() const { return mt_; }
  const std::vector<Index>& support() const { return S_; }
  const Vector& support_weights() const { return st_; }
  const std::vector<Vector>& vectors() const { return a_; }
  const Subspace& extra() const { return extra_; }

  // Verifies the per-round identities on x (over supp(s)), flips, updates s.
  SketchRound apply(Vector x, Vector& s, Index kcount) const {
    SketchRound rec;
    rec.support_before = mt_;
    rec.high_count = static_cast<Index>(sets_.high.size());
    rec.low_count = static_cast<Index>(sets_.low.size());
    const double logf = std::max(1.0, std::sqrt(std::max(0.0, std::log(static_cast<double>(kcount) / mt_))));
    const double n = static_cast<double>(g_.n());
    for (size_t k = 0; k < zbar_.size(); ++k) {
      const Vector& z = zbar_[k];
      double lhs = 0, rhs = 0, scale = 0;
      for (Index j = 0; j < mt_; ++j) {
        const Edge& e = g_.edge(S_[j]);
        const double xs = x(j) * st_(j);
        const double diff = z(e.u) - z(e.v);
        lhs += xs * diff * diff;
        rhs += -2.0 * xs * z(e.u) * z(e.v);
        scale += std::abs(xs) * (z(e.u) * z(e.u) + z(e.v) * z(e.v));
      }
      rec.identity_residual = std::max(rec.identity_residual, std::abs(lhs - rhs) / std::max(1.0, scale));
      const double an = a_[k].norm();
      if (an > 1e-12) {
        rec.discrepancy_ratio = std::max(rec.discrepancy_ratio, std::abs(lhs) / (2.0 * an * logf));
        if (dquad_(static_cast<Index>(k)) > 0)
          rec.norm_chain_ratio = std::max(rec.norm_chain_ratio, an / (n / mt_ * dquad_(static_cast<Index>(k))));
      }
    }

    Index plus = 0, minus = 0;
    for (Index j = 0; j < mt_; ++j) {
      if (x(j) == 1.0) ++plus;
      if (x(j) == -1.0) ++minus;
    }
    if (plus > minus) x = -x;
    for (Index j = 0; j < mt_; ++j) s(S_[j]) *= 1.0 + x(j);

    Index after = 0;
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > 0) ++after;
    rec.support_after = after;
    const Vector deg = reweighted(g_, s).degrees();
    rec.degree_dev = (deg - g_.degrees()).cwiseAbs().maxCoeff();
    return rec;
  }

 private:
  const Graph& g_;
  const std::vector<Vector>& zbar_;
  const Vector& dquad_;
  std::vector<Index> S_;
  Index mt_ = 0;
  FreezeSets sets_;
  Vector st_;
  std::vector<Vector> a_;
  Subspace extra_;
};

struct Centered {
  std::vector<Vector> zbar;
  Vector dquad;     // zbar^T D zbar
  double cf_margin = 0;  // min_z (zbar^T L zbar - lambda zbar^T D zbar) / max(1, zbar^T D zbar)
};

Centered center_all(const Graph& g, const std::vector<Vector>& K, double lambda) {
  Centered c;
  const Vector d = g.degrees();
  const Matrix L = laplacian(g).dense();
  c.dquad.resize(static_cast<Index>(K.size()));
  c.cf_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < K.size(); ++k) {
    Vector zb = shift_center(K[k], g);
    const double dq = zb.dot(d.asDiagonal() * zb);
    c.dquad(static_cast<Index>(k)) = dq;
    c.cf_margin = std::min(c.cf_margin, (zb.dot(L * zb) - lambda * dq) / std::max(1.0, dq));
    c.zbar.push_back(std::move(zb));
  }
  return c;
}

std::vector<Vector> restrict_vectors(const std::vector<Vector>& K, const std::vector<Index>& vertices) {
  std::vector<Vector> out;
  out.reserve(K.size());
  for (const auto& z : K) {
    Vector r(static_cast<Index>(vertices.size()));
    for (size_t i = 0; i < vertices.size(); ++i) r(static_cast<Index>(i)) = z(vertices[i]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

SketchResult sketch_expander(const Graph& g, const std::vector<Vector>& K, double eps, double lambda,
                             const SketchOptions& opt) {
  require_simple_undirected(g, "sketch_expander");
  if (!(eps > 0) || !std::isfinite(eps)) throw InvalidInput("sketch_expander: eps must be positive");
  if (static_cast<Index>(K.size()) < g.n())
    throw InvalidInput("sketch_expander: need at least n constraint vectors");
  for (const auto& z : K)
    if (z.size() != g.n() || !z.allFinite()) throw InvalidInput("sketch_expander: bad constraint vector");
  const Index m = g.edge_count();
  SketchResult out;
  out.scales = Vector::Ones(m);
  out.graph = g;
  out.pieces = 1;
  if (m == 0) {
    out.pass = true;
    return out;
  }
  if (!(lambda > 0)) throw InvalidInput("sketch_expander: lambda must be positive");
  const double lambda2 = normalized_lambda2(g);
  if (lambda > lambda2 * (1.0 + 1e-12) + 1e-12)
    throw InvalidInput("sketch_expander: lambda " + std::to_string(lambda) + " exceeds lambda_2 = " +
                       std::to_string(lambda2));

  const Index kcount = static_cast<Index>(K.size());
  const double f = std::max(1.0, std::sqrt(std::max(0.0, std::log(static_cast<double>(kcount) / m)))) / lambda;
  out.threshold = opt.threshold_scale * static_cast<double>(g.n()) * f / eps;
  const Centered c = center_all(g, K, lambda2);
  out.cf_margin = c.cf_margin;

  VectorWalkOptions walk = opt.walk;
  walk.allow_fewer_constraints = true;
  Vector& s = out.scales;
  while (static_cast<double>((s.array() > 0).count()) > out.threshold) {
    const HalvingRound round(g, s, c.zbar, c.dquad);
    const VectorColoring vc = vector_partial_color(round.vectors(), round.extra(), walk);
    SketchRound rec = round.apply(vc.x, s, kcount);
    rec.round = ++out.rounds;
    rec.walk_iterations = vc.iterations;
    if (opt.observer) opt.observer(rec);
  }
  out.graph = reweighted(g, s);
  out.worst_ratio = quadratic_ratio_error(laplacian(g), laplacian(out.graph), K);
  out.pass = out.worst_ratio <= opt.c_accuracy * eps;
  return out;
}

SketchResult sketch(const Graph& g, const std::vector<Vector>& K, double eps, const SketchOptions& opt) {
  require_simple_undirected(g, "sketch");
  if (static_cast<Index>(K.size()) < g.n()) throw InvalidInput("sketch: need at least n constraint vectors");
  for (const auto& z : K)
    if (z.size() != g.n() || !z.allFinite()) throw InvalidInput("sketch: bad constraint vector");
  SketchResult out;
  out.scales = Vector::Ones(g.edge_count());
  out.cf_margin = std::numeric_limits<double>::infinity();
  if (g.edge_count() > 0) {
    const Decomposition dec = expander_decompose(g, opt.phi_target);
    out.pieces = static_cast<Index>(dec.pieces.size());
    for (const auto& piece : dec.pieces) {
      const Subgraph sub = edge_subgraph(g, piece.edges);
      const SketchResult r =
          sketch_expander(sub.graph, restrict_vectors(K, sub.vertices), eps, piece.lambda2, opt);
      for (size_t k = 0; k < sub.edges.size(); ++k) out.scales(sub.edges[k]) = r.scales(static_cast<Index>(k));
      out.rounds += r.rounds;
      out.threshold = std::max(out.threshold, r.threshold);
      out.cf_margin = std::min(out.cf_margin, r.cf_margin);
    }
  }
  if (!std::isfinite(out.cf_margin)) out.cf_margin = 0;
  out.graph = reweighted(g, out.scales);
  out.worst_ratio = quadratic_ratio_error(laplacian(g), laplacian(out.graph), K);
  out.pass = out.worst_ratio <= opt.c_accuracy * eps;
  return out;
}

namespace {

// Walk whose directions flatten the matrix potential of `fam`, carry no
// weighted gradient for the vector constraints, avoid their heavy and
// high-variance directions, and stay in `extra`.
PartialColoring combined_walk(const DoubledFamily& fam, const ConstraintSet& cs, Index kcount, const Subspace& extra,
                              const ResistanceOptions& opt) {
  const Index m = fam.size();
  if (lambda_max(fam.abs_sum()) > 1.0 + 1e-8)
    throw InvalidInput("resistance_sparsify: spectral invariant lost (sum of members exceeds the identity)");
  PartialColoring out;
  out.eta = std::sqrt(static_cast<double>(m)) / 4.0;
  const double lambda0 = mwu_lambda0(kcount, m);
  out.alpha = std::min(1.0 / (2.0 * out.eta), 1.0 / (2.0 * lambda0));
  const Index max_iter = static_cast<Index>(std::ceil(m / (out.alpha * out.alpha))) + m + 1;

  Vector x = Vector::Zero(m);
  std::vector<Index> active = detail::active_set(x);
  Index t = 0;
  while (4 * static_cast<Index>(active.size()) > 3 * m) {
    if (t >= max_iter) throw SubspaceExhausted("resistance_sparsify: iteration budget exceeded");
    const Index ma = static_cast<Index>(active.size());
    const Index cut = ceil_div(ma, 6);
    const PotentialContext ctx = doubled_context(fam.aggregate(x), out.eta);
    const EigenDecomposition eN = eigh(quad_matrix(ctx, fam, active));
    const MwuStepData data = mwu_step_data(cs, mwu_weights(cs, x, lambda0), active, cut);

    detail::RowStack rows(ma);
    rows.add(detail::gather(x, active));
    rows.add(linear_row(ctx, fam, active));
    rows.add(data.rows);
    if (data.has_constraints) rows.add(detail::top_eigvec_rows(data.W, ma - cut));
    if (extra.codim() > 0) rows.add(detail::gather_cols(extra.complement(), active));
    const Matrix C = rows.matrix();

    Vector ya = detail::constrained_direction(detail::low_eigvecs(eN, ma - cut), C);
    if (ya.size() == 0 && opt.widen_when_empty) {
      ya = detail::constrained_direction(eN.vectors, C);
      if (ya.size() != 0) ++out.widened_steps;
    }
    if (ya.size() == 0)
      throw SubspaceExhausted("resistance_sparsify: empty combined subspace with " + std::to_string(ma) +
                              " active edges (raise the threshold constant)");
    const Vector y = detail::scatter(ya, active, m);
    const double delta = detail::advance(x, y, out.alpha, opt.freeze_tol);
    if (step_norm(ctx, fam.doubled_aggregate(delta * y)) > 0.5 + 1e-9)
      throw StepTooLarge("resistance_sparsify: step exceeds the admissible size");
    active = detail::active_set(x);
    ++t;
  }
  out.x = x;
  out.iterations = t;
  out.frozen = detail::count_frozen(x);
  out.norm = operator_norm(fam.aggregate(x));
  return out;
}

struct PieceResult {
  Vector scales;
  Index rounds = 0;
  double threshold = 0;
  bool stopped_small = false;
};

PieceResult resistance_piece(const Graph& g, double lambda, double eps, const ResistanceOptions& opt) {
  const Index n = g.n();
  const Index m = g.edge_count();
  PieceResult out;
  out.scales = Vector::Ones(m);
  out.threshold = opt.c_threshold * n * std::sqrt(std::log(static_cast<double>(n))) / (lambda * eps);
  if (static_cast<double>(m) <= out.threshold) return out;

  const SymMatrix L = laplacian(g);
  const Matrix R = matrix_function(L, SpectralFunction::PinvSqrt).dense();
  const Matrix P = matrix_function(L, SpectralFunction::Pinv).dense();
  std::vector<Vector> vs;
  for (const auto& e : g.edges()) vs.push_back(R * incidence(n, e.u, e.v));
  const DoubledFamily base = DoubledFamily::rank_one(vs, Vector::Ones(m));
  std::vector<Vector> K;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) K.push_back(P * incidence(n, i, j));
  const Index kcount = static_cast<Index>(K.size());
  const Centered c = center_all(g, K, lambda);

  Vector& s = out.scales;
  while (static_cast<double>((s.array() > 0).count()) > out.threshold) {
    const HalvingRound round(g, s, c.zbar, c.dquad);
    if (round.size() < opt.min_size) {
      out.stopped_small = true;
      break;
    }
    const ConstraintSet cs(round.vectors(), round.size());
    const PartialColoring pc = combined_walk(base.subset(round.support()).scaled(0.5 * round.support_weights()), cs,
                                             kcount, round.extra(), opt);
    SketchRound rec = round.apply(pc.x, s, kcount);
    rec.round = ++out.rounds;
    rec.walk_iterations = pc.iterations;
    rec.sum_lambda_max = lambda_max(base.aggregate(s));
    if (opt.observer) opt.observer(rec);
  }
  return out;
}

}  // namespace

ResistanceResult resistance_sparsify(const Graph& g, double eps, const ResistanceOptions& opt) {
  require_simple_undirected(g, "resistance_sparsify");
  if (!(eps > 0) || !std::isfinite(eps)) throw InvalidInput("resistance_sparsify: eps must be positive");
  ResistanceResult out;
  out.scales = Vector::Ones(g.edge_count());
  if (g.edge_count() > 0) {
    const Decomposition dec = expander_decompose(g, opt.phi_target);
    out.pieces = static_cast<Index>(dec.pieces.size());
    for (const auto& piece : dec.pieces) {
      const Subgraph sub = edge_subgraph(g, piece.edges);
      const PieceResult r = resistance_piece(sub.graph, piece.lambda2, eps, opt);
      for (size_t k = 0; k < sub.edges.size(); ++k) out.scales(sub.edges[k]) = r.scales(static_cast<Index>(k));
      out.rounds += r.rounds;
      out.threshold = std::max(out.threshold, r.threshold);
      out.stopped_small = out.stopped_small || r.stopped_small;
    }
  }
  out.graph = reweighted(g, out.scales);

  for (const auto& comp : connected_components(g)) {
    if (comp.size() < 2) continue;
    const Subgraph a = component_subgraph(g, comp);
    const Subgraph b = component_subgraph(out.graph, comp);
    const Index n = a.graph.n();
    const SymMatrix L = laplacian(a.graph), Lh = laplacian(b.graph);
    const SymMatrix R = matrix_function(L, SpectralFunction::PinvSqrt);
    const Matrix P = matrix_function(L, SpectralFunction::Pinv).dense();
    const Matrix Ph = matrix_function(Lh, SpectralFunction::Pinv).dense();
    out.spectral_eps = std::max(
        out.spectral_eps, operator_norm(SymMatrix::from_upper(R.dense() * (L - Lh).dense() * R.dense())));
    std::vector<Vector> K;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const Vector bij = incidence(n, i, j);
        const double r0 = bij.dot(P * bij);
        const double r1 = bij.dot(Ph * bij);
        out.worst_ratio = std::max(out.worst_ratio, std::abs(r1 / r0 - 1.0));
        K.push_back(P * bij);
      }
    out.sketch_eps = std::max(out.sketch_eps, quadratic_ratio_error(L, Lh, K));
  }
  out.pass = out.worst_ratio <= opt.c_accuracy * eps;
  return out;
}

}  // namespace discwalk
