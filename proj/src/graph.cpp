#include "discwalk/graph.hpp"

#include "discwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

namespace discwalk {

Graph::Graph(Index n, std::vector<Edge> edges, bool directed)
    : n_(n), edges_(std::move(edges)), directed_(directed) {
  if (n_ < 0) throw InvalidInput("graph: negative vertex count");
  for (auto& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_) throw InvalidInput("graph: vertex out of range");
    if (e.u == e.v) throw InvalidInput("graph: self-loop at vertex " + std::to_string(e.u));
    if (!(e.w > 0) || !std::isfinite(e.w)) throw InvalidInput("graph: weights must be finite and positive");
    if (!directed_ && e.u > e.v) std::swap(e.u, e.v);
  }
}

Vector Graph::degrees() const {
  Vector d = Vector::Zero(n_);
  for (const auto& e : edges_) {
    d(e.u) += e.w;
    d(e.v) += e.w;
  }
  return d;
}

Vector Graph::out_degrees() const {
  Vector d = Vector::Zero(n_);
  for (const auto& e : edges_) {
    d(e.u) += e.w;
    if (!directed_) d(e.v) += e.w;
  }
  return d;
}

Vector Graph::in_degrees() const {
  Vector d = Vector::Zero(n_);
  for (const auto& e : edges_) {
    d(e.v) += e.w;
    if (!directed_) d(e.u) += e.w;
  }
  return d;
}

Vector Graph::weights() const {
  Vector w(edge_count());
  for (Index i = 0; i < edge_count(); ++i) w(i) = edges_[static_cast<size_t>(i)].w;
  return w;
}

namespace {

void require_undirected(const Graph& g, const char* what) {
  if (g.directed()) throw InvalidInput(std::string(what) + ": undirected graph required");
}

Vector inv_sqrt_degrees(const Vector& d) {
  Vector r(d.size());
  for (Index i = 0; i < d.size(); ++i) r(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  return r;
}

}  // namespace

Matrix adjacency_matrix(const Graph& g) {
  Matrix a = Matrix::Zero(g.n(), g.n());
  for (const auto& e : g.edges()) {
    a(e.u, e.v) += e.w;
    if (!g.directed()) a(e.v, e.u) += e.w;
  }
  return a;
}

SymMatrix laplacian(const Graph& g) {
  require_undirected(g, "laplacian");
  Matrix l = Matrix::Zero(g.n(), g.n());
  for (const auto& e : g.edges()) {
    l(e.u, e.u) += e.w;
    l(e.v, e.v) += e.w;
    l(e.u, e.v) -= e.w;
    l(e.v, e.u) -= e.w;
  }
  return SymMatrix::from_upper(l);
}

SymMatrix unsigned_laplacian(const Graph& g) {
  require_undirected(g, "unsigned_laplacian");
  Matrix l = Matrix::Zero(g.n(), g.n());
  for (const auto& e : g.edges()) {
    l(e.u, e.u) += e.w;
    l(e.v, e.v) += e.w;
    l(e.u, e.v) += e.w;
    l(e.v, e.u) += e.w;
  }
  return SymMatrix::from_upper(l);
}

SymMatrix normalized_laplacian(const Graph& g) {
  const Vector r = inv_sqrt_degrees(g.degrees());
  return SymMatrix::from_upper(r.asDiagonal() * laplacian(g).dense() * r.asDiagonal());
}

GraphMatrices graph_matrices(const Graph& g) {
  require_undirected(g, "graph_matrices");
  GraphMatrices out;
  out.adjacency = SymMatrix::from_upper(adjacency_matrix(g));
  out.degree = SymMatrix::diagonal(g.degrees());
  out.laplacian = laplacian(g);
  out.unsigned_laplacian = unsigned_laplacian(g);
  out.normalized_laplacian = normalized_laplacian(g);
  return out;
}

Vector incidence(Index n, Index u, Index v) {
  Vector b = Vector::Zero(n);
  b(u) = 1.0;
  b(v) = -1.0;
  return b;
}

Vector unsigned_incidence(Index n, Index u, Index v) {
  Vector b = Vector::Zero(n);
  b(u) = 1.0;
  b(v) = 1.0;
  return b;
}

std::vector<std::vector<Index>> connected_components(const Graph& g) {
  std::vector<std::vector<Index>> adj(static_cast<size_t>(g.n()));
  for (const auto& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<int> seen(static_cast<size_t>(g.n()), 0);
  std::vector<std::vector<Index>> comps;
  for (Index s = 0; s < g.n(); ++s) {
    if (seen[s]) continue;
    std::vector<Index> comp{s};
    seen[s] = 1;
    for (size_t k = 0; k < comp.size(); ++k)
      for (Index t : adj[comp[k]])
        if (!seen[t]) {
          seen[t] = 1;
          comp.push_back(t);
        }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

bool is_connected(const Graph& g) { return g.n() > 0 && connected_components(g).size() == 1; }

std::optional<std::vector<int>> bipartition(const Graph& g) {
  std::vector<std::vector<Index>> adj(static_cast<size_t>(g.n()));
  for (const auto& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<int> side(static_cast<size_t>(g.n()), -1);
  for (Index s = 0; s < g.n(); ++s) {
    if (side[s] >= 0) continue;
    side[s] = 0;
    std::queue<Index> q;
    q.push(s);
    while (!q.empty()) {
      const Index a = q.front();
      q.pop();
      for (Index b : adj[a]) {
        if (side[b] < 0) {
          side[b] = 1 - side[a];
          q.push(b);
        } else if (side[b] == side[a]) {
          return std::nullopt;
        }
      }
    }
  }
  return side;
}

Graph reweighted(const Graph& g, const Vector& s) {
  if (s.size() != g.edge_count()) throw InvalidInput("reweighted: weight vector length mismatch");
  std::vector<Edge> out;
  for (Index i = 0; i < g.edge_count(); ++i) {
    const double w = s(i) * g.edge(i).w;
    if (w > 0) out.push_back({g.edge(i).u, g.edge(i).v, w});
  }
  return Graph(g.n(), std::move(out), g.directed());
}

Subgraph edge_subgraph(const Graph& g, std::span<const Index> edge_ids) {
  Subgraph sg;
  std::vector<Index> local(static_cast<size_t>(g.n()), -1);
  for (Index id : edge_ids) {
    local[g.edge(id).u] = 0;
    local[g.edge(id).v] = 0;
  }
  for (Index v = 0; v < g.n(); ++v)
    if (local[v] == 0) {
      local[v] = static_cast<Index>(sg.vertices.size());
      sg.vertices.push_back(v);
    }
  std::vector<Edge> edges;
  for (Index id : edge_ids) {
    const Edge& e = g.edge(id);
    edges.push_back({local[e.u], local[e.v], e.w});
    sg.edges.push_back(id);
  }
  sg.graph = Graph(static_cast<Index>(sg.vertices.size()), std::move(edges), g.directed());
  return sg;
}

Subgraph component_subgraph(const Graph& g, std::span<const Index> vertices) {
  std::vector<int> in(static_cast<size_t>(g.n()), 0);
  for (Index v : vertices) in[v] = 1;
  std::vector<Index> ids;
  for (Index i = 0; i < g.edge_count(); ++i)
    if (in[g.edge(i).u] && in[g.edge(i).v]) ids.push_back(i);
  Subgraph sg = edge_subgraph(g, ids);
  if (sg.vertices.size() != vertices.size()) {
    // keep isolated vertices of the requested set
    std::vector<Index> local(static_cast<size_t>(g.n()), -1);
    sg.vertices.assign(vertices.begin(), vertices.end());
    std::sort(sg.vertices.begin(), sg.vertices.end());
    for (size_t k = 0; k < sg.vertices.size(); ++k) local[sg.vertices[k]] = static_cast<Index>(k);
    std::vector<Edge> edges;
    for (Index id : ids) edges.push_back({local[g.edge(id).u], local[g.edge(id).v], g.edge(id).w});
    sg.graph = Graph(static_cast<Index>(sg.vertices.size()), std::move(edges), g.directed());
  }
  return sg;
}

Graph bipartite_lift(const Graph& g) {
  if (!g.directed()) throw InvalidInput("bipartite_lift: directed graph required");
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (const auto& e : g.edges()) edges.push_back({e.u, g.n() + e.v, e.w});
  return Graph(2 * g.n(), std::move(edges), false);
}

Graph unlift(const Graph& original, const Vector& lift_scales) { return reweighted(original, lift_scales); }

std::pair<SymMatrix, SymMatrix> sv_error_matrices(const Graph& g) {
  const Matrix a = adjacency_matrix(g);
  const Vector dout = g.directed() ? g.out_degrees() : g.degrees();
  const Vector din = g.directed() ? g.in_degrees() : g.degrees();
  auto pinv = [](const Vector& d) {
    Vector r(d.size());
    for (Index i = 0; i < d.size(); ++i) r(i) = d(i) > 0 ? 1.0 / d(i) : 0.0;
    return r;
  };
  const Matrix e = Matrix(dout.asDiagonal()) - a * pinv(din).asDiagonal() * a.transpose();
  const Matrix f = Matrix(din.asDiagonal()) - a.transpose() * pinv(dout).asDiagonal() * a;
  return {SymMatrix::from_upper(e), SymMatrix::from_upper(f)};
}

double normalized_lambda2(const Graph& g) {
  std::vector<Index> ids(static_cast<size_t>(g.edge_count()));
  std::iota(ids.begin(), ids.end(), 0);
  const Subgraph sg = edge_subgraph(g, ids);
  if (sg.graph.n() < 2) return 0.0;
  return eigh(normalized_laplacian(sg.graph)).values(1);
}

double default_phi_target(Index n) {
  const double l = std::log2(static_cast<double>(std::max<Index>(n, 2)));
  return 1.0 / (4.0 * l * l);
}

namespace {

struct Decomposer {
  const Graph& g;
  double phi;
  std::vector<ExpanderPiece> pieces;

  void emit(const Subgraph& sg, double lambda2) {
    ExpanderPiece p;
    p.edges = sg.edges;
    p.vertices = sg.vertices;
    std::sort(p.edges.begin(), p.edges.end());
    p.lambda2 = lambda2;
    pieces.push_back(std::move(p));
  }

  void run(const std::vector<Index>& edge_ids) {
    if (edge_ids.empty()) return;
    const Subgraph whole = edge_subgraph(g, edge_ids);
    for (const auto& comp : connected_components(whole.graph)) {
      std::vector<int> in(static_cast<size_t>(whole.graph.n()), 0);
      for (Index v : comp) in[v] = 1;
      std::vector<Index> comp_edges;
      for (Index i = 0; i < whole.graph.edge_count(); ++i)
        if (in[whole.graph.edge(i).u]) comp_edges.push_back(whole.edges[i]);
      if (!comp_edges.empty()) split(comp_edges);
    }
  }

  void split(const std::vector<Index>& edge_ids) {
    const Subgraph sg = edge_subgraph(g, edge_ids);
    const Index k = sg.graph.n();
    const EigenDecomposition e = eigh(normalized_laplacian(sg.graph));
    const double lambda2 = e.values(1);
    if (edge_ids.size() == 1 || lambda2 >= phi) {
      emit(sg, lambda2);
      return;
    }
    // sweep cut along D^-1/2 v2
    const Vector d = sg.graph.degrees();
    Vector y(k);
    for (Index v = 0; v < k; ++v) y(v) = e.vectors(v, 1) / std::sqrt(d(v));
    std::vector<Index> order(static_cast<size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return y(a) < y(b); });
    std::vector<std::vector<std::pair<Index, double>>> adj(static_cast<size_t>(k));
    for (const auto& ed : sg.graph.edges()) {
      adj[ed.u].push_back({ed.v, ed.w});
      adj[ed.v].push_back({ed.u, ed.w});
    }
    const double total = d.sum();
    std::vector<int> in_s(static_cast<size_t>(k), 0);
    double vol = 0, cut = 0, best = std::numeric_limits<double>::infinity();
    Index best_len = 1;
    for (Index p = 0; p + 1 < k; ++p) {
      const Index v = order[p];
      in_s[v] = 1;
      vol += d(v);
      for (const auto& [t, w] : adj[v]) cut += in_s[t] ? -w : w;
      const double cond = cut / std::min(vol, total - vol);
      if (cond < best) {
        best = cond;
        best_len = p + 1;
      }
    }
    std::fill(in_s.begin(), in_s.end(), 0);
    for (Index p = 0; p < best_len; ++p) in_s[order[p]] = 1;
    std::vector<Index> inside, outside, crossing;
    for (Index i = 0; i < sg.graph.edge_count(); ++i) {
      const auto& ed = sg.graph.edge(i);
      const int a = in_s[ed.u], b = in_s[ed.v];
      (a && b ? inside : (!a && !b ? outside : crossing)).push_back(sg.edges[i]);
    }
    if (crossing.size() == edge_ids.size())
      throw InvalidInput("expander_decompose: phi_target " + std::to_string(phi) +
                         " is not achievable by sweep cuts on this graph");
    run(inside);
    run(outside);
    run(crossing);
  }
};

}  // namespace

Decomposition expander_decompose(const Graph& g, std::optional<double> phi_target) {
  if (g.directed()) throw InvalidInput("expander_decompose: undirected graph required");
  Decomposition out;
  out.phi_target = phi_target.value_or(default_phi_target(g.n()));
  if (!(out.phi_target > 0) || out.phi_target > 2.0)
    throw InvalidInput("expander_decompose: phi_target must lie in (0, 2]");
  Decomposer dec{g, out.phi_target, {}};
  std::vector<Index> all(static_cast<size_t>(g.edge_count()));
  std::iota(all.begin(), all.end(), 0);
  dec.run(all);
  out.pieces = std::move(dec.pieces);
  std::vector<Index> mult(static_cast<size_t>(g.n()), 0);
  for (const auto& p : out.pieces)
    for (Index v : p.vertices) out.max_multiplicity = std::max(out.max_multiplicity, ++mult[v]);
  return out;
}

}  // namespace discwalk
