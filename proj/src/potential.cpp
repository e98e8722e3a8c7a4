#include "discwalk/potential.hpp"

#include "discwalk/errors.hpp"

#include <algorithm>
#include <cmath>

namespace discwalk {

double solve_normalizer(const Vector& lambda, double eta) {
  const Index n = lambda.size();
  if (n == 0) throw InvalidInput("solve_normalizer: empty matrix");
  if (!(eta > 0) || !std::isfinite(eta)) throw InvalidInput("solve_normalizer: eta must be positive");
  const double top = eta * lambda.maxCoeff();
  const double scale = std::max(1.0, std::abs(top));
  auto f = [&](double u) {
    double s = 0;
    for (Index i = 0; i < n; ++i) {
      const double g = u - eta * lambda(i);
      s += 1.0 / (g * g);
    }
    return s;
  };
  double lo = top + 1e-14 * scale;
  double hi = top + std::sqrt(static_cast<double>(n));
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  // pick whichever bracket end has the smaller residual
  return std::abs(f(lo) - 1.0) < std::abs(f(hi) - 1.0) ? lo : hi;
}

double solve_normalizer(const SymMatrix& a, double eta) {
  if (a.dim() == 0) throw InvalidInput("solve_normalizer: empty matrix");
  return solve_normalizer(eigh(a).values, eta);
}

SymMatrix PotentialContext::M_power(double p) const {
  const Index n = eigenvalues.size();
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = std::pow(u - eta * eigenvalues(i), -2.0 * p);
  Matrix vd = eigenvectors * d.asDiagonal();
  return SymMatrix::from_upper(vd * eigenvectors.transpose());
}

PotentialContext density_optimizer(const SymMatrix& a, double eta) {
  if (a.dim() == 0) throw InvalidInput("density_optimizer: empty matrix");
  EigenDecomposition e = eigh(a);
  PotentialContext ctx;
  ctx.eta = eta;
  ctx.A_of_x = a;
  ctx.u = solve_normalizer(e.values, eta);
  ctx.eigenvalues = std::move(e.values);
  ctx.eigenvectors = std::move(e.vectors);
  ctx.M = ctx.M_power(1.0);
  return ctx;
}

double potential_value(const PotentialContext& ctx) {
  double tr = 0;
  for (Index i = 0; i < ctx.eigenvalues.size(); ++i) tr += 1.0 / (ctx.u - ctx.eta * ctx.eigenvalues(i));
  return tr / ctx.eta + ctx.u / ctx.eta;
}

double step_norm(const PotentialContext& ctx, const SymMatrix& a_y) {
  // ||M^1/2 B||^2 = lambda_max(B M B) for symmetric B
  const Matrix b = ctx.eta * a_y.dense();
  const SymMatrix bmb = SymMatrix::from_upper(b * ctx.M.dense() * b);
  return std::sqrt(std::max(0.0, lambda_max(bmb)));
}

IncreaseBound verify_increase_bound(const PotentialContext& ctx, const SymMatrix& a_y) {
  if (a_y.dim() != ctx.A_of_x.dim()) throw InvalidInput("verify_increase_bound: dimension mismatch");
  const double sn = step_norm(ctx, a_y);
  if (sn > 0.5 + 1e-12) throw StepTooLarge("step norm " + std::to_string(sn) + " exceeds 1/2");
  const PotentialContext next = density_optimizer(ctx.A_of_x + a_y, ctx.eta);
  IncreaseBound b;
  b.lhs = potential_value(next) - potential_value(ctx);
  const Matrix half = ctx.M_power(0.5).dense();
  const Matrix& y = a_y.dense();
  const double lin = (ctx.M.dense() * y).trace();
  const double quad = (half * y * half * y * half).trace();
  b.rhs = lin + 2.0 * ctx.eta * quad;
  b.ok = b.lhs <= b.rhs + 1e-8;
  return b;
}

}  // namespace discwalk
