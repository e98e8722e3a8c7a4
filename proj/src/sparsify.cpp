#include "discwalk/sparsify.hpp"

#include "discwalk/errors.hpp"
#include "walk_common.hpp"

#include <algorithm>
#include <cmath>

namespace discwalk {

std::vector<Index> Reweighting::support() const {
  std::vector<Index> out;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > 0) out.push_back(i);
  return out;
}

Index Reweighting::support_size() const {
  Index c = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > 0) ++c;
  return c;
}

namespace {

SparsifyResult run_sparsify(const DoubledFamily& family, const Subspace& H, double eps, const SparsifyOptions& opt,
                            bool require_psd) {
  const Index m = family.size();
  const Index n = family.dim();
  if (!(eps > 0) || !std::isfinite(eps)) throw InvalidInput("sparsify: eps must be positive");
  if (opt.c_support <= 0) throw InvalidInput("sparsify: c_support must be positive");
  if (H.ambient_dim() != m) throw InvalidInput("sparsify: subspace ambient dimension mismatch");

  SparsifyResult out;
  out.eps = opt.guarantee_mode ? std::min(eps, 1.0 / 32.0) : eps;
  out.threshold = static_cast<double>(opt.c_support) * static_cast<double>(n) / (out.eps * out.eps);
  out.weights.s = Vector::Ones(m);
  if (m == 0) return out;

  if (require_psd) {
    for (const auto& a : family.original()) {
      const EigenDecomposition e = eigh(a);
      const double norm = std::max(std::abs(e.values(0)), std::abs(e.values(n - 1)));
      if (e.values(0) < -1e-8 * std::max(1.0, norm)) throw InvalidInput("sparsify: member is not PSD");
    }
    if (lambda_max(family.aggregate(Vector::Ones(m))) > 1.0 + 1e-8)
      throw InvalidInput("sparsify: sum of members exceeds the identity");
  } else if (lambda_max(family.abs_sum()) > 1.0 + 1e-8) {
    throw InvalidInput("sparsify: sum of absolute members exceeds the identity");
  }

  Vector& s = out.weights.s;
  while (static_cast<double>(out.weights.support_size()) > out.threshold) {
    const std::vector<Index> S = out.weights.support();
    const Index mt = static_cast<Index>(S.size());
    if (mt < opt.walk.min_size) {
      out.stopped_small = true;
      break;
    }
    const Vector st = detail::gather(s, S);
    Matrix rows = detail::gather_cols(H.complement(), S);
    for (Index j = 0; j < mt; ++j) rows.col(j) *= st(j);
    const Subspace Ht = rows.rows() ? nullspace(rows) : Subspace::full(mt);
    if (5 * Ht.dim() < 4 * mt)
      throw SubspaceExhausted("sparsify: restricted subspace has dimension " + std::to_string(Ht.dim()) +
                              " < 4/5 of " + std::to_string(mt) + " (c_support too small)");

    const PartialColoring pc = partial_color(family.subset(S).scaled(0.5 * st), Ht, opt.walk);
    Vector x = pc.x;
    Index plus = 0, minus = 0;
    for (Index j = 0; j < mt; ++j) {
      if (x(j) == 1.0) ++plus;
      if (x(j) == -1.0) ++minus;
    }
    if (plus > minus) x = -x;
    for (Index j = 0; j < mt; ++j) s(S[j]) *= 1.0 + x(j);

    ++out.rounds;
    if (opt.observer) {
      SparsifyRound r;
      r.round = out.rounds;
      r.support_before = mt;
      r.support_after = out.weights.support_size();
      r.walk_iterations = pc.iterations;
      r.sum_lambda_max = lambda_max(family.aggregate(s));
      r.h_residual = H.residual(s - Vector::Ones(m));
      r.min_weight = s.minCoeff();
      opt.observer(r);
    }
  }
  out.measured_eps = operator_norm(family.aggregate(s - Vector::Ones(m)));
  return out;
}

}  // namespace

SparsifyResult sparsify(const DoubledFamily& family, const Subspace& H, double eps, const SparsifyOptions& opt) {
  return run_sparsify(family, H, eps, opt, true);
}

SparsifyResult sparsify(const std::vector<SymMatrix>& family, const Subspace& H, double eps,
                        const SparsifyOptions& options) {
  return sparsify(DoubledFamily(family), H, eps, options);
}

SparsifyResult sparsify_symmetric(const std::vector<SymMatrix>& family, const Subspace& H, double eps,
                                  const SparsifyOptions& options) {
  std::vector<SymMatrix> lifted;
  lifted.reserve(family.size());
  for (const auto& a : family)
    lifted.push_back(SymMatrix::block_diag(a, matrix_function(a, SpectralFunction::Abs)));
  return run_sparsify(DoubledFamily(lifted), H, eps, options, false);
}

Matrix degree_rows(const Graph& g, const Vector& s) {
  if (s.size() != g.edge_count()) throw InvalidInput("degree_rows: weight vector length mismatch");
  Matrix rows = Matrix::Zero(g.n(), g.edge_count());
  for (Index i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edge(i);
    rows(e.u, i) = s(i) * e.w;
    rows(e.v, i) = s(i) * e.w;
  }
  return rows;
}

Subspace degree_subspace(const Graph& g, const Vector& s) {
  if (g.directed()) throw InvalidInput("degree_subspace: undirected graph required");
  return nullspace(degree_rows(g, s));
}

namespace {

void require_connected_undirected(const Graph& g, const char* what) {
  if (g.directed()) throw InvalidInput(std::string(what) + ": undirected graph required");
  if (g.edge_count() > 0 && !is_connected(g))
    throw InvalidInput(std::string(what) + ": graph is disconnected (sparsify each component)");
}

GraphSparsifier run_graph_family(const Graph& g, const DoubledFamily& fam, double eps, const SparsifyOptions& opt) {
  const SparsifyResult r = sparsify(fam, degree_subspace(g, Vector::Ones(g.edge_count())), eps, opt);
  GraphSparsifier out;
  out.scales = r.weights.s;
  out.graph = reweighted(g, out.scales);
  out.measured_eps = r.measured_eps;
  out.rounds = r.rounds;
  out.threshold = r.threshold;
  out.family_norm = lambda_max(fam.aggregate(Vector::Ones(fam.size())));
  return out;
}

GraphSparsifier identity_sparsifier(const Graph& g) {
  GraphSparsifier out;
  out.graph = g;
  out.scales = Vector::Ones(g.edge_count());
  return out;
}

double relative_error(const SymMatrix& pinv_sqrt, const SymMatrix& a, const SymMatrix& b) {
  return operator_norm(SymMatrix::from_upper(pinv_sqrt.dense() * (a - b).dense() * pinv_sqrt.dense()));
}

}  // namespace

GraphSparsifier spectral_sparsify(const Graph& g, double eps, const SparsifyOptions& opt) {
  require_connected_undirected(g, "spectral_sparsify");
  if (g.edge_count() == 0) return identity_sparsifier(g);
  const SymMatrix R = matrix_function(laplacian(g), SpectralFunction::PinvSqrt);
  std::vector<Vector> vs;
  for (const auto& e : g.edges()) vs.push_back(R.dense() * incidence(g.n(), e.u, e.v));
  return run_graph_family(g, DoubledFamily::rank_one(vs, g.weights()), eps, opt);
}

GraphSparsifier uc_sparsify(const Graph& g, double eps, const SparsifyOptions& opt) {
  require_connected_undirected(g, "uc_sparsify");
  if (g.edge_count() == 0) return identity_sparsifier(g);
  const Index n = g.n();
  const SymMatrix L = laplacian(g), U = unsigned_laplacian(g);
  const SymMatrix RL = matrix_function(L, SpectralFunction::PinvSqrt);
  const SymMatrix RU = matrix_function(U, SpectralFunction::PinvSqrt);
  std::vector<Matrix> fs;
  for (const auto& e : g.edges()) {
    Matrix f = Matrix::Zero(2 * n, 2);
    f.col(0).head(n) = RL.dense() * incidence(n, e.u, e.v);
    f.col(1).tail(n) = RU.dense() * unsigned_incidence(n, e.u, e.v);
    fs.push_back(std::move(f));
  }
  GraphSparsifier out = run_graph_family(g, DoubledFamily::from_factors(fs, g.weights()), eps, opt);
  out.measured_eps = relative_error(RL, L, laplacian(out.graph));
  out.unsigned_eps = relative_error(RU, U, unsigned_laplacian(out.graph));
  return out;
}

double sv_admissible_lambda(const Graph& g) {
  require_connected_undirected(g, "sv_admissible_lambda");
  if (!bipartition(g)) throw InvalidInput("sv_admissible_lambda: graph is not bipartite");
  if (g.edge_count() == 0) return 0;
  const SymMatrix R = matrix_function(sv_error_matrices(g).first, SpectralFunction::PinvSqrt);
  return 1.0 / lambda_max(SymMatrix::from_upper(R.dense() * laplacian(g).dense() * R.dense()));
}

GraphSparsifier sv_sparsify_expander(const Graph& g, double lambda, double eps, const SparsifyOptions& opt) {
  require_connected_undirected(g, "sv_sparsify_expander");
  if (!bipartition(g)) throw InvalidInput("sv_sparsify_expander: graph is not bipartite");
  if (g.edge_count() == 0) return identity_sparsifier(g);
  const double lambda2 = normalized_lambda2(g);
  if (!(lambda > 0)) throw InvalidInput("sv_sparsify_expander: lambda must be positive");
  if (lambda > lambda2 * (1.0 + 1e-12) + 1e-12)
    throw InvalidInput("sv_sparsify_expander: lambda " + std::to_string(lambda) + " exceeds lambda_2 = " +
                       std::to_string(lambda2));
  const SymMatrix E = sv_error_matrices(g).first;
  const SymMatrix R = matrix_function(E, SpectralFunction::PinvSqrt);
  std::vector<Vector> vs;
  for (const auto& e : g.edges()) vs.push_back(R.dense() * incidence(g.n(), e.u, e.v));
  const double unit_norm = lambda_max(DoubledFamily::rank_one(vs, g.weights()).aggregate(Vector::Ones(g.edge_count())));
  const double scale = std::min(lambda, 1.0 / unit_norm);
  const DoubledFamily fam = DoubledFamily::rank_one(vs, scale * g.weights());
  GraphSparsifier out = run_graph_family(g, fam, eps, opt);
  out.family_scale = scale;
  out.measured_eps = relative_error(R, laplacian(g), laplacian(out.graph));
  return out;
}

SvSparsifier sv_sparsify(const Graph& g, double eps, std::optional<double> phi_target, const SparsifyOptions& opt) {
  if (!g.directed()) throw InvalidInput("sv_sparsify: directed graph required");
  for (const auto& e : g.edges())
    if (e.w != 1.0) throw InvalidInput("sv_sparsify: unweighted arcs required");
  SvSparsifier out;
  out.scales = Vector::Ones(g.edge_count());
  if (g.edge_count() == 0) {
    out.graph = g;
    return out;
  }
  const Graph lift = bipartite_lift(g);
  out.decomposition = expander_decompose(lift, phi_target);
  for (const auto& piece : out.decomposition.pieces) {
    const Subgraph sub = edge_subgraph(lift, piece.edges);
    const double lam = std::min(piece.lambda2, sv_admissible_lambda(sub.graph));
    const GraphSparsifier gs = sv_sparsify_expander(sub.graph, lam, eps * lam, opt);
    for (size_t k = 0; k < sub.edges.size(); ++k) out.scales(sub.edges[k]) = gs.scales(static_cast<Index>(k));
    out.piece_eps.push_back(gs.measured_eps);
  }
  out.graph = unlift(g, out.scales);
  const auto [E, F] = sv_error_matrices(g);
  const Matrix diff = adjacency_matrix(g) - adjacency_matrix(out.graph);
  const SymMatrix RE = matrix_function(E, SpectralFunction::PinvSqrt);
  const SymMatrix RF = matrix_function(F, SpectralFunction::PinvSqrt);
  out.measured_eps = spectral_norm(RE.dense() * diff * RF.dense());
  return out;
}

Vector per_component_scales(const Graph& g, const std::function<Vector(const Graph&)>& fn) {
  Vector scales = Vector::Ones(g.edge_count());
  for (const auto& comp : connected_components(g)) {
    if (comp.size() < 2) continue;
    const Subgraph sub = component_subgraph(g, comp);
    if (sub.graph.edge_count() == 0) continue;
    const Vector local = fn(sub.graph);
    for (size_t k = 0; k < sub.edges.size(); ++k) scales(sub.edges[k]) = local(static_cast<Index>(k));
  }
  return scales;
}

}  // namespace discwalk
