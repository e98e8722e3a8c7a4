#include <doctest.h>

#include "builders.hpp"
#include "discwalk/errors.hpp"
#include "discwalk/vector_walk.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

using namespace discwalk;
using discwalk::testing::Rng;

namespace {

MwuState state_at(const Vector& x, const ConstraintSet& cs, double lambda0) {
  MwuState s;
  s.x = x;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) < 1) s.active.push_back(i);
  s.lambda0 = lambda0;
  s.weights = mwu_weights(cs, x, lambda0);
  return s;
}

std::vector<Vector> gaussian(Index m, Index k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  for (Index i = 0; i < k; ++i) out.push_back(testing::random_vector(m, rng));
  return out;
}

}  // namespace

TEST_SUITE("vector_walk") {

TEST_CASE("weights follow the exponential formula") {
  const auto a = gaussian(10, 30, 41);
  const ConstraintSet cs(a, 10);
  Rng rng(42);
  const Vector x = 0.3 * testing::random_vector(10, rng);
  const double l0 = 1.3;
  const MwuWeights w = mwu_weights(cs, x, l0);
  for (Index i = 0; i < cs.size(); ++i) {
    const double p = a[static_cast<size_t>(i)].dot(x) / a[static_cast<size_t>(i)].norm();
    CHECK(w.plus(i) == doctest::Approx(std::exp(l0 * p - l0 * l0)).epsilon(1e-9));
    CHECK(w.minus(i) == doctest::Approx(std::exp(-l0 * p - l0 * l0)).epsilon(1e-9));
    CHECK(cs.unit().row(i).norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("tiny constraints are dropped") {
  std::vector<Vector> a = {Vector::Zero(4), Vector::Ones(4), Vector::Constant(4, 1e-14)};
  const ConstraintSet cs(a, 4);
  CHECK(cs.size() == 1);
  CHECK(cs.kept() == std::vector<Index>{1});
}

TEST_CASE("lambda0") {
  CHECK(mwu_lambda0(10, 10) == 1.0);
  CHECK(mwu_lambda0(5, 10) == 1.0);
  CHECK(mwu_lambda0(1000, 10) == doctest::Approx(std::sqrt(std::log(100.0))));
}

TEST_CASE("subspace without constraints only removes x") {
  const Index m = 30;
  const ConstraintSet cs(std::vector<Vector>(static_cast<size_t>(m), Vector::Zero(m)), m);
  Rng rng(43);
  const Vector x = 0.2 * testing::random_vector(m, rng);
  const Subspace U = mwu_subspace(state_at(x, cs, 1.0), cs, Subspace::full(m));
  CHECK(U.dim() == m - 1);
}

TEST_CASE("coordinate constraints with equal weights cut the first indices") {
  const Index m = 40;
  std::vector<Vector> a;
  for (Index i = 0; i < m; ++i) a.push_back(Vector::Unit(m, i));
  const ConstraintSet cs(a, m);
  const Subspace U = mwu_subspace(state_at(Vector::Zero(m), cs, 1.0), cs, Subspace::full(m));
  REQUIRE(U.dim() > 0);
  const Matrix B = U.basis();
  CHECK(B.topRows(4).cwiseAbs().maxCoeff() <= 1e-10);  // ceil(40/10) heaviest, ties by index
}

TEST_CASE("gaussian constraints: every basis vector meets every listed condition") {
  const Index m = 50, k = 200;
  const auto a = gaussian(m, k, 44);
  const ConstraintSet cs(a, m);
  Rng rng(45);
  const Vector x = (0.4 * testing::random_vector(m, rng)).cwiseMax(-0.9).cwiseMin(0.9);
  const double l0 = mwu_lambda0(k, m);
  const MwuState st = state_at(x, cs, l0);
  const Subspace U = mwu_subspace(st, cs, Subspace::full(m));
  REQUIRE(U.dim() > 0);

  Matrix unit(k, m);
  Vector c(k), grad = Vector::Zero(m);
  for (Index i = 0; i < k; ++i) {
    unit.row(i) = a[static_cast<size_t>(i)].transpose() / a[static_cast<size_t>(i)].norm();
    const double p = unit.row(i).dot(x);
    const double wp = std::exp(l0 * p - l0 * l0), wm = std::exp(-l0 * p - l0 * l0);
    c(i) = wp + wm;
    grad += (wp - wm) * unit.row(i).transpose();
  }
  std::vector<Index> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index p, Index q) { return c(p) > c(q); });
  Matrix W = Matrix::Zero(m, m);
  for (Index i = 0; i < k; ++i) W += c(i) * unit.row(i).transpose() * unit.row(i);
  W /= c.sum();
  Eigen::SelfAdjointEigenSolver<Matrix> es(W);
  const Index low = (9 * m) / 10;
  const Matrix top = es.eigenvectors().rightCols(m - low);

  const Matrix B = U.basis();
  for (Index j = 0; j < B.cols(); ++j) {
    const Vector y = B.col(j);
    CHECK(std::abs(y.dot(x)) <= 1e-9);
    CHECK(std::abs(y.dot(grad)) <= 1e-9 * std::max(1.0, grad.norm()));
    for (Index h = 0; h < (m + 9) / 10; ++h) CHECK(std::abs(unit.row(order[h]).dot(y)) <= 1e-9);
    CHECK((top.transpose() * y).norm() <= 1e-9);
  }
}

TEST_CASE("zero constraints give zero discrepancy") {
  const Index m = 20;
  const VectorColoring vc =
      vector_partial_color(std::vector<Vector>(static_cast<size_t>(m), Vector::Zero(m)), Subspace::full(m));
  CHECK(vc.frozen >= 5);
  CHECK(vc.max_discrepancy_ratio == 0.0);
}

TEST_CASE("coordinate constraints") {
  const Index m = 24;
  std::vector<Vector> a;
  for (Index i = 0; i < m; ++i) a.push_back(Vector::Unit(m, i));
  const VectorColoring vc = vector_partial_color(a, Subspace::full(m));
  CHECK(vc.x.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(vc.max_discrepancy_ratio <= 12.0);
}

TEST_CASE("gaussian directions m = 50, k = 400") {
  const Index m = 50, k = 400;
  const auto a = testing::random_unit_vectors(m, k, 46);
  double adm = 0;
  Index steps = 0;
  double gap = 0;
  VectorWalkOptions o;
  o.observer = [&](const VectorStepRecord& r) {
    adm = std::max(adm, r.admissibility);
    gap = std::max(gap, std::abs(r.norm_sq_after - r.norm_sq_before - r.delta * r.delta));
    ++steps;
  };
  const VectorColoring vc = vector_partial_color(a, Subspace::full(m), o);
  double worst = 0;
  for (const auto& v : a) worst = std::max(worst, std::abs(v.dot(vc.x)));
  CHECK(worst <= 12.0 * std::sqrt(std::log(8.0)));
  CHECK(vc.frozen >= (m + 3) / 4);
  CHECK(vc.x.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(adm <= 0.5);
  CHECK(gap <= 1e-9);
  CHECK(steps == vc.iterations);
}

TEST_CASE("coloring stays in the extra subspace and is deterministic") {
  const Index m = 40;
  const auto a = gaussian(m, 80, 47);
  Rng rng(48);
  Matrix rows(6, m);
  for (Index i = 0; i < 6; ++i) rows.row(i) = testing::random_vector(m, rng).transpose();
  const Subspace extra = nullspace(rows);
  const VectorColoring v1 = vector_partial_color(a, extra);
  const VectorColoring v2 = vector_partial_color(a, extra);
  CHECK(extra.residual(v1.x) <= 1e-8);
  CHECK(v1.x == v2.x);
}

TEST_CASE("input contract") {
  const Index m = 10;
  CHECK_THROWS_AS(vector_partial_color(gaussian(m, 5, 49), Subspace::full(m)), InvalidInput);
  auto bad = gaussian(m, 12, 50);
  bad[3](2) = std::nan("");
  CHECK_THROWS_AS(vector_partial_color(bad, Subspace::full(m)), InvalidInput);
  VectorWalkOptions o;
  o.allow_fewer_constraints = true;
  CHECK_NOTHROW(vector_partial_color(gaussian(m, 5, 51), Subspace::full(m), o));
}

}
