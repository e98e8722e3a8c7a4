#include <doctest.h>

#include "builders.hpp"
#include "discwalk/errors.hpp"
#include "discwalk/potential.hpp"

#include <cmath>

using namespace discwalk;
using discwalk::testing::Rng;

namespace {

double residual(const Vector& lam, double eta, double u) {
  return ((u - eta * lam.array()).square().inverse()).sum() - 1.0;
}

// Draws a step with ||M^1/2 eta A_y|| = target.
SymMatrix admissible_step(const PotentialContext& ctx, Rng& rng, double target) {
  SymMatrix ay = testing::random_symmetric(ctx.A_of_x.dim(), rng);
  const double s = step_norm(ctx, ay);
  return ay * (target / s);
}

}  // namespace

TEST_SUITE("potential") {

TEST_CASE("normalizer closed forms") {
  CHECK(solve_normalizer(SymMatrix::zero(5), 0.7) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(solve_normalizer(SymMatrix::zero(1), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  Vector lam(2);
  lam << 0, 1;
  // root of u^-2 + (u-1)^-2 = 1, from a 30-digit root finder
  CHECK(solve_normalizer(lam, 1.0) == doctest::Approx(2.13224188231190).epsilon(1e-12));
  CHECK_THROWS_AS(solve_normalizer(Vector(0), 1.0), InvalidInput);
}

TEST_CASE("normalizer residual on random inputs") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const SymMatrix a = testing::random_symmetric(1 + t % 6, rng);
    const double eta = 0.1 + (t % 10) * 0.5;
    const Vector lam = eigh(a).values;
    const double u = solve_normalizer(lam, eta);
    CHECK(u > eta * lam.maxCoeff());
    CHECK(std::abs(residual(lam, eta, u)) <= 1e-10);
  }
}

TEST_CASE("density optimizer") {
  const PotentialContext c = density_optimizer(SymMatrix::zero(4), 1.3);
  CHECK((c.M.dense() - Matrix::Identity(4, 4) / 4).cwiseAbs().maxCoeff() <= 1e-12);
  Vector d(2);
  d << 0, 1;
  const PotentialContext e = density_optimizer(SymMatrix::diagonal(d), 1.0);
  const double u = 2.13224188231190;
  CHECK(e.M(0, 0) == doctest::Approx(1 / (u * u)).epsilon(1e-10));
  CHECK(e.M(1, 1) == doctest::Approx(1 / ((u - 1) * (u - 1))).epsilon(1e-10));
  CHECK(e.M(0, 1) == doctest::Approx(0.0));

  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const PotentialContext r = density_optimizer(testing::random_symmetric(2 + t % 5, rng), 0.5 + t % 3);
    CHECK(r.M.trace() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lambda_min(r.M) > 0);
  }
}

TEST_CASE("potential value closed forms and sandwich") {
  for (Index n : {1, 3, 8}) {
    const double eta = 0.8;
    const PotentialContext c = density_optimizer(SymMatrix::zero(n), eta);
    CHECK(potential_value(c) == doctest::Approx(2 * std::sqrt(static_cast<double>(n)) / eta).epsilon(1e-12));
  }
  CHECK(potential_value(density_optimizer(SymMatrix::zero(1), 1.0)) == doctest::Approx(2.0));

  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 6;
    const double eta = 0.3 + 0.2 * (t % 7);
    const SymMatrix a = testing::random_symmetric(n, rng);
    const double phi = potential_value(density_optimizer(a, eta));
    const double top = lambda_max(a);
    CHECK(top <= phi + 1e-8);
    CHECK(phi <= top + 2 * std::sqrt(static_cast<double>(n)) / eta + 1e-8);
  }
}

TEST_CASE("potential increase bound on admissible steps") {
  Rng rng(14);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 6;
    const double eta = 0.5 + 0.25 * (t % 5);
    const PotentialContext ctx = density_optimizer(testing::random_symmetric(n, rng), eta);
    const SymMatrix ay = admissible_step(ctx, rng, 0.5 * (0.1 + 0.9 * ((t * 13) % 10) / 10.0));
    const IncreaseBound b = verify_increase_bound(ctx, ay);
    CHECK(b.ok);
    CHECK(b.lhs <= b.rhs + 1e-8);
    CHECK(verify_increase_bound(ctx, ay * -1.0).ok);
  }
}

TEST_CASE("zero step gives zero change") {
  const PotentialContext ctx = density_optimizer(SymMatrix::identity(3), 1.0);
  const IncreaseBound b = verify_increase_bound(ctx, SymMatrix::zero(3));
  CHECK(std::abs(b.lhs) <= 1e-12);
  CHECK(std::abs(b.rhs) <= 1e-12);
  CHECK(b.ok);
}

TEST_CASE("oversized steps are rejected") {
  Rng rng(15);
  const PotentialContext ctx = density_optimizer(testing::random_symmetric(4, rng), 1.0);
  const SymMatrix ay = admissible_step(ctx, rng, 0.8);
  CHECK_THROWS_AS(verify_increase_bound(ctx, ay), StepTooLarge);
}

TEST_CASE("frozen normalizer upper-bounds the new potential") {
  Rng rng(16);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 6;
    const double eta = 0.7;
    const SymMatrix a = testing::random_symmetric(n, rng);
    const PotentialContext ctx = density_optimizer(a, eta);
    const SymMatrix ay = admissible_step(ctx, rng, 0.45);
    const SymMatrix next = a + ay;
    const Matrix shifted = ctx.u * Matrix::Identity(n, n) - eta * next.dense();
    const double frozen = shifted.inverse().trace() / eta + ctx.u / eta;
    CHECK(frozen >= potential_value(density_optimizer(next, eta)) - 1e-8);
  }
}

}
