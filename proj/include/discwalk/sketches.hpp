#pragma once

#include "discwalk/graph.hpp"
#include "discwalk/linalg.hpp"
#include "discwalk/vector_walk.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace discwalk {

/// z - c 1 with c the degree-weighted mean of z, so sum_v d(v) zbar(v) = 0.
Vector shift_center(const Vector& z, const Graph& g);

/// Edge classes of supp(s): high (s(uv) > 10 d(v)/d_s(v) at an endpoint),
/// low (an endpoint has d_s <= m_t/(10 n), not already high) and free (the rest).
struct FreezeSets {
  std::vector<Index> high;
  std::vector<Index> low;
  std::vector<Index> free;
};
FreezeSets freeze_sets(const Graph& g, const Vector& s);

struct SketchRound {
  Index round = 0;
  Index support_before = 0;
  Index support_after = 0;
  Index walk_iterations = 0;
  Index high_count = 0;
  Index low_count = 0;
  double identity_residual = 0;   // max_z |sum x s <b,z>^2 + 2 sum x s zbar zbar| / scale
  double discrepancy_ratio = 0;   // max_z |sum x s <b,z>^2| / (2 ||a_z|| max(1, sqrt(log(|K|/m_t))))
  double norm_chain_ratio = 0;    // max_z ||a_z|| / ((n/m_t) zbar^T D zbar)
  double degree_dev = 0;          // max |weighted degree - degree|
  double sum_lambda_max = 0;      // resistance walk only: lambda_max(sum s A_e)
};

struct SketchOptions {
  double c_accuracy = 4;      // C_sk, pass threshold on the worst ratio is c_accuracy * eps
  double threshold_scale = 1;  // multiplies n f(n) / eps
  std::optional<double> phi_target;
  VectorWalkOptions walk;
  std::function<void(const SketchRound&)> observer;
};

struct SketchResult {
  Graph graph;
  Vector scales;  // per input edge
  Index rounds = 0;
  double threshold = 0;     // largest per-piece edge threshold
  double worst_ratio = 0;   // max_z |z^T L^ z / z^T L z - 1| over z with z^T L z > 0
  double cf_margin = 0;     // min_z (zbar^T L zbar - lambda zbar^T D zbar) / max(1, zbar^T D zbar)
  Index pieces = 0;
  bool pass = false;        // worst_ratio <= c_accuracy * eps
};

/// Unweighted undirected g with lambda <= lambda_2 of its normalized
/// Laplacian and at least n constraint vectors.
SketchResult sketch_expander(const Graph& g, const std::vector<Vector>& K, double eps, double lambda,
                             const SketchOptions& options = {});
/// Expander decomposition, then sketch_expander on every piece.
SketchResult sketch(const Graph& g, const std::vector<Vector>& K, double eps, const SketchOptions& options = {});

/// max_z |z^T L2 z / z^T L1 z - 1| over z with z^T L1 z > tol.
double quadratic_ratio_error(const SymMatrix& L1, const SymMatrix& L2, const std::vector<Vector>& K);

struct ResistanceOptions {
  double c_threshold = 1;  // threshold c n sqrt(log n) / (lambda eps)
  double c_accuracy = 4;   // C_r
  std::optional<double> phi_target;
  double freeze_tol = 1e-9;
  Index min_size = 40;
  bool widen_when_empty = true;
  std::function<void(const SketchRound&)> observer;
};

struct ResistanceResult {
  Graph graph;
  Vector scales;
  Index rounds = 0;
  double threshold = 0;
  double worst_ratio = 0;   // all-pairs effective resistance ratio error
  double spectral_eps = 0;  // ||L^+/2 (L - L^) L^+/2||, max over components
  double sketch_eps = 0;    // quadratic ratio error on {L^+ b_ij}
  Index pieces = 0;
  bool stopped_small = false;
  bool pass = false;        // worst_ratio <= c_accuracy * eps
};

/// Unweighted undirected g: per expander piece, a walk whose direction
/// keeps the matrix potential of {L^+/2 b_e b_e^T L^+/2} flat, has small
/// discrepancy against {L^+ b_ij}, and preserves degrees.
ResistanceResult resistance_sparsify(const Graph& g, double eps, const ResistanceOptions& options = {});

}  // namespace discwalk
