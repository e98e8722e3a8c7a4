#pragma once

#include "discwalk/linalg.hpp"

namespace discwalk {

/// Optimizer of the regularized maximum-eigenvalue potential at one point.
struct PotentialContext {
  double eta = 1;
  SymMatrix A_of_x;
  double u = 0;
  SymMatrix M;  // (uI - eta A)^-2, trace one
  // eigendecomposition of A_of_x, kept so powers of M are cheap
  Vector eigenvalues;
  Matrix eigenvectors;

  /// M^p = V diag((u - eta lambda)^(-2p)) V^T
  SymMatrix M_power(double p) const;
};

/// u with sum_i (u - eta lambda_i)^-2 = 1, by bisection.
double solve_normalizer(const Vector& eigenvalues, double eta);
double solve_normalizer(const SymMatrix& a, double eta);

PotentialContext density_optimizer(const SymMatrix& a, double eta);

/// (1/eta) tr((uI - eta A)^-1) + u/eta
double potential_value(const PotentialContext& ctx);

/// ||M^{1/2} (eta A_y)||_op
double step_norm(const PotentialContext& ctx, const SymMatrix& a_y);

struct IncreaseBound {
  double lhs = 0;  // Phi(x+y) - Phi(x)
  double rhs = 0;  // tr(M A_y) + 2 eta tr(M^1/2 A_y M^1/2 A_y M^1/2)
  bool ok = false;
};

IncreaseBound verify_increase_bound(const PotentialContext& ctx, const SymMatrix& a_y);

}  // namespace discwalk
