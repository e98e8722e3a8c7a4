#pragma once

#include "discwalk/graph.hpp"
#include "discwalk/linalg.hpp"
#include "discwalk/matrix_walk.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace discwalk {

/// Nonnegative weights over m items; zeroed items are exactly 0.
struct Reweighting {
  Vector s;
  std::vector<Index> support() const;
  Index support_size() const;
};

struct SparsifyRound {
  Index round = 0;
  Index support_before = 0;
  Index support_after = 0;
  Index walk_iterations = 0;
  double sum_lambda_max = 0;  // lambda_max(sum_i s_i A_i) after the update
  double h_residual = 0;      // distance of s - 1 from H
  double min_weight = 0;
};

struct SparsifyOptions {
  Index c_support = 1024;
  /// Clamp eps to at most 1/32 (the regime the halving argument covers).
  bool guarantee_mode = false;
  PartialColorOptions walk;
  std::function<void(const SparsifyRound&)> observer;
};

struct SparsifyResult {
  Reweighting weights;
  Index rounds = 0;
  double eps = 0;            // eps actually used
  double threshold = 0;      // c_support n / eps^2
  double measured_eps = 0;   // ||sum (s_i - 1) A_i||_op
  bool stopped_small = false;  // loop ended because the support fell below the walk minimum
};

/// Halving loop: repeatedly partial-color {s_i A_i / 2} inside
/// {y : diag(s) y in H}, flip so -1 is at least as frequent as +1, and
/// update s_i <- s_i (1 + x_i) until the support is at most c_support n / eps^2.
SparsifyResult sparsify(const DoubledFamily& family, const Subspace& H, double eps,
                        const SparsifyOptions& options = {});
SparsifyResult sparsify(const std::vector<SymMatrix>& family, const Subspace& H, double eps,
                        const SparsifyOptions& options = {});
/// Symmetric (not necessarily PSD) members, handled through diag(A_i, |A_i|).
SparsifyResult sparsify_symmetric(const std::vector<SymMatrix>& family, const Subspace& H, double eps,
                                  const SparsifyOptions& options = {});

/// Rows (one per vertex) with entry s(e) w(e) at each incident edge.
Matrix degree_rows(const Graph& g, const Vector& s);
Subspace degree_subspace(const Graph& g, const Vector& s);

struct GraphSparsifier {
  Graph graph;       // reweighted subgraph
  Vector scales;     // per input edge; output weight = scales(e) * w(e)
  double measured_eps = 0;
  double unsigned_eps = 0;  // unsigned-Laplacian error (uc_sparsify only)
  Index rounds = 0;
  double threshold = 0;
  double family_norm = 0;  // ||sum_e A_e||_op of the family that was sparsified
  double family_scale = 1;  // sv_sparsify_expander: lambda' actually used
};

/// Degree-preserving spectral sparsifier of a connected undirected graph.
GraphSparsifier spectral_sparsify(const Graph& g, double eps, const SparsifyOptions& options = {});
/// Degree-preserving sparsifier approximating both L and the unsigned Laplacian U.
GraphSparsifier uc_sparsify(const Graph& g, double eps, const SparsifyOptions& options = {});
/// 1 / ||E^+/2 L E^+/2|| for a connected bipartite g; equals lambda_2 of the
/// normalized Laplacian for regular g and lies slightly below it otherwise.
double sv_admissible_lambda(const Graph& g);
/// Bipartite connected g with lambda <= lambda_2 of its normalized Laplacian.
/// The family is scaled by lambda' = min(lambda, sv_admissible_lambda(g)) so it
/// sums to at most I; guarantee lambda' ||E^+/2 (L - L^) E^+/2|| <= eps with
/// E = D - A D^-1 A.
GraphSparsifier sv_sparsify_expander(const Graph& g, double lambda, double eps,
                                     const SparsifyOptions& options = {});

struct SvSparsifier {
  Graph graph;  // directed, reweighted arcs
  Vector scales;
  Decomposition decomposition;
  double measured_eps = 0;  // singular-value error against the directed error matrices
  std::vector<double> piece_eps;
};

/// Directed unweighted g: lift, decompose, sparsify each piece with
/// eps' = eps * lambda' (lambda' = sv_admissible_lambda of the piece), union,
/// map back to arcs.
SvSparsifier sv_sparsify(const Graph& g, double eps, std::optional<double> phi_target = std::nullopt,
                         const SparsifyOptions& options = {});

/// Runs `fn` on every connected component with at least one edge and
/// assembles per-edge scales (edges of trivial components keep scale 1).
Vector per_component_scales(const Graph& g, const std::function<Vector(const Graph&)>& fn);

}  // namespace discwalk
