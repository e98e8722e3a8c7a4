#pragma once

#include "discwalk/linalg.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace discwalk {

/// Constraint vectors normalized to unit length; vectors with norm <= 1e-12
/// are dropped.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  ConstraintSet(const std::vector<Vector>& a, Index m);

  Index size() const { return unit_.rows(); }
  Index given() const { return given_; }
  Index dim() const { return m_; }
  const Matrix& unit() const { return unit_; }      // rows are unit vectors
  const Vector& norms() const { return norms_; }    // original norms of kept rows
  const std::vector<Index>& kept() const { return kept_; }

 private:
  Index m_ = 0;
  Index given_ = 0;
  Matrix unit_;
  Vector norms_;
  std::vector<Index> kept_;
};

/// max(1, sqrt(log(k/m))) with the log clamped at 0.
double mwu_lambda0(Index k, Index m);

/// Weights of the symmetric constraint set {+a_i, -a_i}:
/// plus_i = exp(l0 <a_i, x> - l0^2), minus_i = exp(-l0 <a_i, x> - l0^2).
struct MwuWeights {
  Vector plus;
  Vector minus;
  Vector total() const { return plus + minus; }
};

MwuWeights mwu_weights(const ConstraintSet& cs, const Vector& x, double lambda0);

struct MwuState {
  Vector x;
  std::vector<Index> active;
  MwuWeights weights;
  double lambda0 = 1;
};

/// Rows (active coordinates) of the potential gradient and of the `heavy`
/// constraints with the largest total weight (ties by index), plus the
/// eigendecomposition of W = sum_i c_i a_i a_i^T / sum_i c_i on active coordinates.
struct MwuStepData {
  Matrix rows;
  EigenDecomposition W;
  bool has_constraints = false;
};

MwuStepData mwu_step_data(const ConstraintSet& cs, const MwuWeights& w, std::span<const Index> active,
                          Index heavy);

/// Admissible directions: supported on active coordinates, orthogonal to x,
/// to the gradient and to the ceil(m_t/10) heaviest constraints, inside the
/// floor(9 m_t/10) lowest eigenvectors of W, and inside `extra`.
Subspace mwu_subspace(const MwuState& state, const ConstraintSet& cs, const Subspace& extra);

struct VectorStepRecord {
  Index t = 0;
  Index active_count = 0;
  double delta = 0;
  double admissibility = 0;  // lambda0 * delta * max_i |<a_i, y>|
  double norm_sq_before = 0;
  double norm_sq_after = 0;
  double extra_residual = 0;
  double x_dot_y = 0;
};

struct VectorWalkOptions {
  double c_disc = 12;
  std::optional<double> alpha;  // default 1/(2 lambda0)
  double freeze_tol = 1e-9;
  /// Accept fewer constraint vectors than coordinates.
  bool allow_fewer_constraints = false;
  std::function<void(const VectorStepRecord&)> observer;
};

struct VectorColoring {
  Vector x;
  Index iterations = 0;
  Index frozen = 0;
  double lambda0 = 1;
  double alpha = 0;
  double max_discrepancy_ratio = 0;  // max_i |<a_i,x>| / (||a_i|| max(1, sqrt(log(k/m))))
};

VectorColoring vector_partial_color(const std::vector<Vector>& a, const Subspace& extra,
                                    const VectorWalkOptions& options = {});

}  // namespace discwalk
