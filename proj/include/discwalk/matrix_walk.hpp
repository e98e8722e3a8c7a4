#pragma once

#include "discwalk/linalg.hpp"
#include "discwalk/potential.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace discwalk {

/// A family A_1..A_m of n x n symmetric matrices used through the doubled
/// matrices diag(A_i, -A_i), so that lambda_max of the doubled aggregate is
/// the operator norm of the original one. Each member is also kept as a
/// signed low-rank factorization A_i = sum_k sign_k f_k f_k^T.
class DoubledFamily {
 public:
  DoubledFamily() = default;
  explicit DoubledFamily(std::vector<SymMatrix> members);
  /// A_i = scale_i * v_i v_i^T with scale_i >= 0.
  static DoubledFamily rank_one(const std::vector<Vector>& vectors, const Vector& scales);
  /// A_i = scale_i * F_i F_i^T with scale_i >= 0 (F_i is n x r_i).
  static DoubledFamily from_factors(const std::vector<Matrix>& factors, const Vector& scales);

  Index size() const { return static_cast<Index>(members_.size()); }
  Index dim() const { return n_; }
  Index doubled_dim() const { return 2 * n_; }
  const std::vector<SymMatrix>& original() const { return members_; }
  SymMatrix doubled(Index i) const;

  /// sum_i x_i A_i (original dimension)
  SymMatrix aggregate(const Vector& x) const;
  /// sum_i x_i diag(A_i, -A_i)
  SymMatrix doubled_aggregate(const Vector& x) const;
  /// sum_i |A_i|
  SymMatrix abs_sum() const;
  /// Family with A_i replaced by c_i A_i (c_i >= 0).
  DoubledFamily scaled(const Vector& c) const;
  /// Family restricted to the listed members, in the given order.
  DoubledFamily subset(std::span<const Index> idx) const;

  const Matrix& factors() const { return factors_; }
  const std::vector<double>& signs() const { return signs_; }
  const std::vector<Index>& owner() const { return owner_; }
  const std::vector<Index>& offsets() const { return offsets_; }

 private:
  void build_offsets();
  Index n_ = 0;
  std::vector<SymMatrix> members_;
  Matrix factors_;             // n x R
  std::vector<double> signs_;  // R
  std::vector<Index> owner_;   // R, member owning each factor column
  std::vector<Index> offsets_;  // m + 1, columns of member i are [offsets_[i], offsets_[i+1])
};

struct ColoringState {
  Vector x;
  std::vector<Index> active;
  Index t = 0;
  double alpha = 0;
  double eta = 0;
};

/// Potential context of the doubled aggregate diag(A, -A), computed from the
/// eigendecomposition of A alone so that M is exactly block diagonal.
PotentialContext doubled_context(const SymMatrix& a, double eta);

/// N(i,j) = tr(M^1/2 D_i M^1/2 D_j M^1/2) over active members, where D_i is
/// the doubled member and M a 2n x 2n density matrix.
SymMatrix quad_matrix(const SymMatrix& M, const DoubledFamily& family, std::span<const Index> active);
SymMatrix quad_matrix(const PotentialContext& ctx, const DoubledFamily& family,
                      std::span<const Index> active);

/// tr(M D_i) for active members.
Vector linear_row(const PotentialContext& ctx, const DoubledFamily& family, std::span<const Index> active);

/// Admissible directions: supported on active coordinates, orthogonal to x,
/// zero linear term, inside the span of the floor(m_t/3) lowest eigenvectors
/// of N (in active coordinates), and inside H.
Subspace step_subspace(const ColoringState& state, const PotentialContext& ctx, const SymMatrix& N,
                       const Subspace& H, const DoubledFamily& family);

struct WalkStepRecord {
  Index t = 0;
  Index active_count = 0;
  Index low_count = 0;  // eigenvectors of N kept for the step
  bool enlarged = false;
  double delta = 0;
  double linear_term = 0;     // tr(M A(y)) for the unit direction
  double quadratic_term = 0;  // y^T N y
  double quadratic_bound = 0;  // 9 sqrt(2n) / m_t^2
  double step_norm = 0;       // ||M^1/2 eta A(delta y)||
  double norm_sq_before = 0;
  double norm_sq_after = 0;
  double potential_before = 0;
  double h_residual = 0;      // distance of y from H
  double x_dot_y = 0;
};

struct PartialColorOptions {
  std::optional<double> eta;    // default sqrt(m)/4
  std::optional<double> alpha;  // default 1/(2 eta)
  double freeze_tol = 1e-9;
  Index min_size = 40;
  double input_tol = 1e-8;
  /// When the floor(m_t/3) eigenspace misses H, widen it just enough to
  /// leave a direction instead of failing.
  bool widen_when_empty = true;
  std::function<void(const WalkStepRecord&)> observer;
};

struct PartialColoring {
  Vector x;
  Index iterations = 0;
  Index frozen = 0;
  Index widened_steps = 0;
  double norm = 0;       // ||sum x_i A_i||_op
  double potential = 0;  // potential of the doubled aggregate at x
  double eta = 0;
  double alpha = 0;
};

PartialColoring partial_color(const DoubledFamily& family, const Subspace& H,
                              const PartialColorOptions& options = {});
PartialColoring partial_color(const std::vector<SymMatrix>& family, const Subspace& H,
                              const PartialColorOptions& options = {});

struct FullColoring {
  Vector x;  // every entry exactly +1 or -1
  Index rounds = 0;
  double norm = 0;          // ||sum x_i A_i||_op
  double partial_norm = 0;  // norm of the first partial coloring
};

/// Iterated partial coloring: freeze the coordinates the walk fixed, reset the
/// rest to zero and walk again on them (inside H restricted to them) until
/// every coordinate is +-1.
FullColoring complete_coloring(const DoubledFamily& family, const Subspace& H,
                               const PartialColorOptions& options = {});
FullColoring complete_coloring(const std::vector<SymMatrix>& family, const Subspace& H,
                               const PartialColorOptions& options = {});

/// 16 sqrt(2n/m)
double partial_color_bound(Index n, Index m);

}  // namespace discwalk
