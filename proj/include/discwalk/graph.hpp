#pragma once

#include "discwalk/linalg.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace discwalk {

struct Edge {
  Index u = 0;
  Index v = 0;
  double w = 1.0;
};

/// Weighted graph on vertices 0..n-1. Undirected edges are stored with u < v.
class Graph {
 public:
  Graph() = default;
  Graph(Index n, std::vector<Edge> edges, bool directed = false);

  Index n() const { return n_; }
  bool directed() const { return directed_; }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(Index i) const { return edges_[static_cast<size_t>(i)]; }

  /// Weighted degrees; for directed graphs the sum of in and out weight.
  Vector degrees() const;
  Vector out_degrees() const;
  Vector in_degrees() const;
  Vector weights() const;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  bool directed_ = false;
};

struct GraphMatrices {
  SymMatrix adjacency;
  SymMatrix degree;
  SymMatrix laplacian;
  SymMatrix unsigned_laplacian;
  SymMatrix normalized_laplacian;
};

GraphMatrices graph_matrices(const Graph& g);
SymMatrix laplacian(const Graph& g);
SymMatrix unsigned_laplacian(const Graph& g);
SymMatrix normalized_laplacian(const Graph& g);
/// A(u, v) = w for every arc u -> v (both orientations when undirected).
Matrix adjacency_matrix(const Graph& g);

/// b_uv = 1_u - 1_v
Vector incidence(Index n, Index u, Index v);
/// 1_u + 1_v
Vector unsigned_incidence(Index n, Index u, Index v);

/// Vertex sets of the connected components (isolated vertices form their own
/// component), ordered by smallest vertex.
std::vector<std::vector<Index>> connected_components(const Graph& g);
bool is_connected(const Graph& g);
/// Side (0 or 1) of every vertex, or nullopt when g has an odd cycle.
std::optional<std::vector<int>> bipartition(const Graph& g);

/// Same vertex set, edge e gets weight s(e) * w(e); edges with zero weight are dropped.
Graph reweighted(const Graph& g, const Vector& s);

/// Subgraph formed by a set of edges, relabelled onto the vertices they touch.
struct Subgraph {
  Graph graph;
  std::vector<Index> vertices;  // local -> global vertex
  std::vector<Index> edges;     // local -> global edge
};
Subgraph edge_subgraph(const Graph& g, std::span<const Index> edge_ids);
Subgraph component_subgraph(const Graph& g, std::span<const Index> vertices);

/// Undirected bipartite graph on 2n vertices: arc i (u -> v, w) becomes edge i
/// (u, n + v, w). Vertices 0..n-1 are out-copies, n..2n-1 in-copies.
Graph bipartite_lift(const Graph& g);
/// Reweighting of the lift mapped back onto the arcs (identity on edge order).
Graph unlift(const Graph& original, const Vector& lift_scales);

/// (E, F) with E = D_out - A D_in^+ A^T and F = D_in - A^T D_out^+ A; for
/// undirected graphs E = F = D - A D^+ A.
std::pair<SymMatrix, SymMatrix> sv_error_matrices(const Graph& g);

/// Second smallest eigenvalue of the normalized Laplacian over the
/// non-isolated vertices (0 for fewer than two such vertices).
double normalized_lambda2(const Graph& g);

struct ExpanderPiece {
  std::vector<Index> edges;     // global edge ids
  std::vector<Index> vertices;  // sorted global vertex ids
  double lambda2 = 0;
};

struct Decomposition {
  std::vector<ExpanderPiece> pieces;
  Index max_multiplicity = 0;
  double phi_target = 0;
};

double default_phi_target(Index n);
Decomposition expander_decompose(const Graph& g, std::optional<double> phi_target = std::nullopt);

}  // namespace discwalk
