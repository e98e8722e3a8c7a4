#include "discwalk/verify.hpp"

#include "discwalk/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace discwalk {

std::string to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::Spectral: return "spectral";
    case ReportKind::Standard: return "standard";
    case ReportKind::Uc: return "uc";
    case ReportKind::Sv: return "sv";
    case ReportKind::Sketch: return "sketch";
    case ReportKind::Resistance: return "resistance";
  }
  return "unknown";
}

std::string report_json(const ApproxReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(r.kind);
  j["measured_eps"] = r.measured_eps;
  j["kernel_ok"] = r.kernel_ok;
  j["degree_max_dev"] = r.degree_max_dev;
  j["support_size"] = r.support_size;
  j["target"] = r.target;
  j["pass"] = r.pass;
  return j.dump(2);
}

namespace {

void finish(ApproxReport& r) {
  r.pass = r.measured_eps <= r.target && r.kernel_ok && r.degree_max_dev <= 1e-6;
}

bool kernel_included(const SymMatrix& E, const Matrix& diff) {
  const Matrix K = kernel_basis(E);
  if (K.cols() == 0) return true;
  const double scale = std::max(1.0, diff.cwiseAbs().maxCoeff());
  return (diff * K).cwiseAbs().maxCoeff() <= 1e-8 * scale;
}

void require_same_vertices(const Graph& g, const Graph& h) {
  if (g.n() != h.n()) throw InvalidInput("verify: graphs have different vertex counts");
  if (g.directed() != h.directed()) throw InvalidInput("verify: graphs differ in directedness");
}

double sandwich_norm(const SymMatrix& E, const Matrix& diff, const SymMatrix& F) {
  const SymMatrix RE = matrix_function(E, SpectralFunction::PinvSqrt);
  const SymMatrix RF = matrix_function(F, SpectralFunction::PinvSqrt);
  return spectral_norm(RE.dense() * diff * RF.dense());
}

Matrix adjacency_difference(const Graph& g, const Graph& h) {
  return adjacency_matrix(g) - adjacency_matrix(h);
}

}  // namespace

double degree_deviation(const Graph& g, const Graph& h) {
  require_same_vertices(g, h);
  if (g.n() == 0) return 0;
  if (g.directed())
    return std::max((g.out_degrees() - h.out_degrees()).cwiseAbs().maxCoeff(),
                    (g.in_degrees() - h.in_degrees()).cwiseAbs().maxCoeff());
  return (g.degrees() - h.degrees()).cwiseAbs().maxCoeff();
}

ApproxReport check_matrix_approx(const Matrix& A, const Matrix& At, const SymMatrix& E, const SymMatrix& F,
                                 double target) {
  if (A.rows() != At.rows() || A.cols() != At.cols() || A.rows() != E.dim() || A.cols() != F.dim())
    throw InvalidInput("check_matrix_approx: dimension mismatch");
  ApproxReport r;
  r.kind = ReportKind::Standard;
  r.target = target;
  const Matrix diff = A - At;
  r.measured_eps = sandwich_norm(E, diff, F);
  r.kernel_ok = kernel_included(E, diff.transpose()) && kernel_included(F, diff);
  r.support_size = (At.array() != 0).count();
  finish(r);
  return r;
}

ApproxReport check_spectral(const Graph& g, const Graph& h, double target) {
  require_same_vertices(g, h);
  if (g.directed()) throw InvalidInput("check_spectral: undirected graphs required");
  const SymMatrix L = laplacian(g);
  ApproxReport r = check_matrix_approx(L.dense(), laplacian(h).dense(), L, L, target);
  r.kind = ReportKind::Spectral;
  r.degree_max_dev = degree_deviation(g, h);
  r.support_size = h.edge_count();
  finish(r);
  return r;
}

ApproxReport check_standard(const Graph& g, const Graph& h, double target) {
  require_same_vertices(g, h);
  const Matrix A = adjacency_matrix(g);
  const Vector d = 0.5 * (A.rowwise().sum() + A.colwise().sum().transpose());
  const SymMatrix E = SymMatrix::from_upper(Matrix(d.asDiagonal()) - 0.5 * (A + A.transpose()));
  ApproxReport r = check_matrix_approx(A, adjacency_matrix(h), E, E, target);
  r.kind = ReportKind::Standard;
  r.degree_max_dev = degree_deviation(g, h);
  r.support_size = h.edge_count();
  finish(r);
  return r;
}

ApproxReport check_uc_undirected(const Graph& g, const Graph& h, double target) {
  require_same_vertices(g, h);
  if (g.directed()) throw InvalidInput("check_uc_undirected: undirected graphs required");
  const Matrix diff = adjacency_difference(g, h);
  const SymMatrix L = laplacian(g), U = unsigned_laplacian(g);
  ApproxReport r;
  r.kind = ReportKind::Uc;
  r.target = target;
  r.measured_eps = std::max(sandwich_norm(L, (L - laplacian(h)).dense(), L),
                            sandwich_norm(U, (U - unsigned_laplacian(h)).dense(), U));
  r.kernel_ok = kernel_included(L, diff) && kernel_included(U, diff);
  r.degree_max_dev = degree_deviation(g, h);
  r.support_size = h.edge_count();
  finish(r);
  return r;
}

ApproxReport check_sv(const Graph& g, const Graph& h, double target) {
  require_same_vertices(g, h);
  const auto [E, F] = sv_error_matrices(g);
  ApproxReport r = check_matrix_approx(adjacency_matrix(g), adjacency_matrix(h), E, F, target);
  r.kind = ReportKind::Sv;
  r.degree_max_dev = degree_deviation(g, h);
  r.support_size = h.edge_count();
  finish(r);
  return r;
}

ApproxReport check_sketch(const Graph& g, const Graph& h, const std::vector<Vector>& K, double target) {
  require_same_vertices(g, h);
  if (g.directed()) throw InvalidInput("check_sketch: undirected graphs required");
  const Matrix L = laplacian(g).dense(), Lh = laplacian(h).dense();
  const double scale = std::max(1.0, operator_norm(laplacian(g)));
  ApproxReport r;
  r.kind = ReportKind::Sketch;
  r.target = target;
  for (const auto& z : K) {
    if (z.size() != g.n()) throw InvalidInput("check_sketch: vector length mismatch");
    const double q = z.dot(L * z);
    const double qh = z.dot(Lh * z);
    if (q <= 1e-12 * scale * z.squaredNorm()) {
      if (std::abs(qh) > 1e-8 * scale * z.squaredNorm()) r.kernel_ok = false;
      continue;
    }
    r.measured_eps = std::max(r.measured_eps, std::abs(qh / q - 1.0));
  }
  r.degree_max_dev = degree_deviation(g, h);
  r.support_size = h.edge_count();
  finish(r);
  return r;
}

double effective_resistance(const Graph& g, Index i, Index j) {
  if (g.directed()) throw InvalidInput("effective_resistance: undirected graph required");
  if (i < 0 || j < 0 || i >= g.n() || j >= g.n()) throw InvalidInput("effective_resistance: vertex out of range");
  const Vector b = incidence(g.n(), i, j);
  return b.dot(matrix_function(laplacian(g), SpectralFunction::Pinv).dense() * b);
}

double effective_resistance_report(const Graph& g, const Graph& h) {
  require_same_vertices(g, h);
  if (g.directed()) throw InvalidInput("effective_resistance_report: undirected graphs required");
  double worst = 0;
  for (const auto& comp : connected_components(g)) {
    if (comp.size() < 2) continue;
    const Subgraph a = component_subgraph(g, comp);
    const Subgraph b = component_subgraph(h, comp);
    const Matrix P = matrix_function(laplacian(a.graph), SpectralFunction::Pinv).dense();
    const Matrix Ph = matrix_function(laplacian(b.graph), SpectralFunction::Pinv).dense();
    const Index n = a.graph.n();
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const double r0 = P(i, i) + P(j, j) - 2 * P(i, j);
        const double r1 = Ph(i, i) + Ph(j, j) - 2 * Ph(i, j);
        worst = std::max(worst, std::abs(r1 / r0 - 1.0));
      }
  }
  return worst;
}

ApproxReport check_resistance(const Graph& g, const Graph& h, double target) {
  ApproxReport r;
  r.kind = ReportKind::Resistance;
  r.target = target;
  r.measured_eps = effective_resistance_report(g, h);
  r.kernel_ok = connected_components(g).size() == connected_components(h).size();
  r.degree_max_dev = degree_deviation(g, h);
  r.support_size = h.edge_count();
  finish(r);
  return r;
}

BruteForceResult brute_force_min_discrepancy(const std::vector<SymMatrix>& family) {
  const Index m = static_cast<Index>(family.size());
  if (m == 0 || m > 20) throw InvalidInput("brute_force_min_discrepancy: need 1 <= m <= 20");
  const Index n = family[0].dim();
  for (const auto& a : family)
    if (a.dim() != n) throw InvalidInput("brute_force_min_discrepancy: dimension mismatch");
  BruteForceResult best;
  best.norm = std::numeric_limits<double>::infinity();
  const std::uint64_t patterns = std::uint64_t{1} << (m - 1);
  Vector x(m);
  for (std::uint64_t p = 0; p < patterns; ++p) {
    // bit k of p (from the most significant of m-1 bits) set means x_{k+1} = -1
    x(0) = 1;
    Matrix sum = family[0].dense();
    for (Index k = 1; k < m; ++k) {
      const bool neg = (p >> (m - 1 - k)) & 1U;
      x(k) = neg ? -1.0 : 1.0;
      sum += x(k) * family[static_cast<size_t>(k)].dense();
    }
    const double nrm = operator_norm(SymMatrix::from_upper(sum));
    if (nrm < best.norm) {
      best.norm = nrm;
      best.x = x;
    }
  }
  return best;
}

}  // namespace discwalk
