#include <doctest.h>

#include "builders.hpp"
#include "discwalk/errors.hpp"
#include "discwalk/matrix_walk.hpp"

#include <cmath>
#include <numeric>

using namespace discwalk;
using discwalk::testing::Rng;

namespace {

std::vector<Index> all_of(Index m) {
  std::vector<Index> v(static_cast<size_t>(m));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// tr(H D_i H D_j H) with H = M^1/2, evaluated densely.
Matrix quad_oracle(const SymMatrix& M, const DoubledFamily& fam) {
  const Matrix H = matrix_function(M, SpectralFunction::SqrtPsd).dense();
  const Index m = fam.size();
  Matrix N(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      N(i, j) = (H * fam.doubled(i).dense() * H * fam.doubled(j).dense() * H).trace();
  return N;
}

SymMatrix random_density(Index n, Rng& rng) {
  SymMatrix p = testing::random_psd(n, rng) + SymMatrix::identity(n) * 0.1;
  return p * (1.0 / p.trace());
}

std::vector<SymMatrix> random_symmetric_family(Index n, Index m, Rng& rng, double scale) {
  std::vector<SymMatrix> out;
  for (Index i = 0; i < m; ++i) out.push_back(testing::random_symmetric(n, rng) * scale);
  return out;
}

}  // namespace

TEST_SUITE("matrix_walk") {

TEST_CASE("doubled aggregate top eigenvalue equals the operator norm") {
  Rng rng(21);
  const DoubledFamily fam(random_symmetric_family(4, 12, rng, 0.1));
  for (int t = 0; t < 20; ++t) {
    Vector x = testing::random_vector(12, rng);
    CHECK(lambda_max(fam.doubled_aggregate(x)) == doctest::Approx(operator_norm(fam.aggregate(x))).epsilon(1e-10));
  }
}

TEST_CASE("quadratic matrix at the uniform density") {
  Rng rng(22);
  const Index n = 3;
  const DoubledFamily fam(random_symmetric_family(n, 6, rng, 1.0));
  const SymMatrix M = SymMatrix::identity(2 * n) * (1.0 / (2 * n));
  const SymMatrix N = quad_matrix(M, fam, all_of(6));
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) {
      const double tr = 2 * (fam.original()[i].dense() * fam.original()[j].dense()).trace();
      CHECK(N(i, j) == doctest::Approx(std::pow(2.0 * n, -1.5) * tr).epsilon(1e-10));
    }
}

TEST_CASE("quadratic matrix matches the dense trace formula") {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    const Index n = 2 + t % 3;
    const DoubledFamily fam(random_symmetric_family(n, 7, rng, 1.0));
    const SymMatrix M = random_density(2 * n, rng);
    const SymMatrix N = quad_matrix(M, fam, all_of(7));
    const Matrix oracle = quad_oracle(M, fam);
    CHECK((N.dense() - oracle).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
    CHECK(lambda_min(N) >= -1e-10);
  }
}

TEST_CASE("quadratic matrix of a zero family is zero") {
  std::vector<SymMatrix> zeros(5, SymMatrix::zero(3));
  const DoubledFamily fam(zeros);
  const SymMatrix N = quad_matrix(SymMatrix::identity(6) * (1.0 / 6), fam, all_of(5));
  CHECK(N.dense().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step subspace with a zero family keeps the low third") {
  std::vector<SymMatrix> zeros(9, SymMatrix::zero(2));
  const DoubledFamily fam(zeros);
  ColoringState st;
  st.x = Vector::Zero(9);
  st.active = all_of(9);
  const PotentialContext ctx = doubled_context(SymMatrix::zero(2), 0.75);
  const SymMatrix N = quad_matrix(ctx, fam, st.active);
  CHECK(step_subspace(st, ctx, N, Subspace::full(9), fam).dim() == 3);
}

TEST_CASE("step subspace constraints hold for every basis vector") {
  const Index n = 4, m = 40;
  const DoubledFamily fam(testing::whitened_family(n, m, 24));
  Rng rng(25);
  ColoringState st;
  st.x = 0.5 * testing::random_vector(m, rng).cwiseMax(-1.0).cwiseMin(1.0);
  st.active = all_of(m);
  const double eta = std::sqrt(static_cast<double>(m)) / 4;
  const PotentialContext ctx = doubled_context(fam.aggregate(st.x), eta);
  const SymMatrix N = quad_matrix(ctx, fam, st.active);
  const Subspace U = step_subspace(st, ctx, N, Subspace::full(m), fam);
  REQUIRE(U.dim() > 0);
  const Matrix B = U.basis();
  for (Index k = 0; k < B.cols(); ++k) {
    const Vector y = B.col(k);
    CHECK(std::abs((ctx.M.dense() * fam.doubled_aggregate(y).dense()).trace()) <= 1e-9);
    CHECK(std::abs(y.dot(st.x)) <= 1e-9);
  }
}

TEST_CASE("zero family partial coloring") {
  std::vector<SymMatrix> zeros(8, SymMatrix::zero(3));
  PartialColorOptions o;
  o.min_size = 1;
  const PartialColoring pc = partial_color(zeros, Subspace::full(8), o);
  CHECK(pc.frozen >= 2);
  CHECK(pc.norm == 0.0);
  CHECK(pc.x.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("partial coloring on a whitened rank-one family with per-step invariants") {
  const Index n = 4, m = 64;
  const auto family = testing::whitened_family(n, m, 26);
  double max_linear = 0, max_quad_excess = -1, max_norm_gap = 0, telescoped = 0;
  Index widened = 0;
  bool monotone = true;
  double eta = std::sqrt(static_cast<double>(m)) / 4;
  PartialColorOptions o;
  o.observer = [&](const WalkStepRecord& r) {
    max_linear = std::max(max_linear, std::abs(r.linear_term));
    if (!r.enlarged) max_quad_excess = std::max(max_quad_excess, r.quadratic_term - r.quadratic_bound);
    if (r.enlarged) ++widened;
    max_norm_gap = std::max(max_norm_gap, std::abs(r.norm_sq_after - r.norm_sq_before - r.delta * r.delta));
    monotone = monotone && r.norm_sq_after >= r.norm_sq_before;
    telescoped += 2 * eta * r.delta * r.delta * r.quadratic_bound;
  };
  const PartialColoring pc = partial_color(family, Subspace::full(m), o);
  CHECK(pc.norm <= 16 * std::sqrt(2.0 * n / m));
  CHECK(pc.frozen >= 16);
  CHECK(pc.x.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(pc.iterations <= m * m / 4 + m);
  CHECK(max_linear <= 1e-8);
  CHECK(max_quad_excess <= 1e-8);
  CHECK(max_norm_gap <= 1e-9);
  CHECK(monotone);
  CHECK(widened == 0);
  CHECK(pc.potential <= 2 * std::sqrt(2.0 * n) / eta + telescoped + 1e-6);
}

TEST_CASE("partial coloring stays inside the constraint subspace") {
  const Index n = 4, m = 64;
  Rng rng(27);
  Matrix rows(12, m);
  for (Index i = 0; i < 12; ++i) rows.row(i) = testing::random_vector(m, rng).transpose();
  const Subspace H = nullspace(rows);
  const PartialColoring pc = partial_color(testing::whitened_family(n, m, 28), H);
  CHECK(H.residual(pc.x) <= 1e-8);
  CHECK(pc.frozen >= 16);
  CHECK(pc.norm <= partial_color_bound(n, m));
}

TEST_CASE("partial coloring is deterministic") {
  const auto family = testing::whitened_family(3, 48, 29);
  const PartialColoring a = partial_color(family, Subspace::full(48));
  const PartialColoring b = partial_color(family, Subspace::full(48));
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("partial coloring input contract") {
  auto family = testing::whitened_family(3, 48, 30);
  CHECK_THROWS_AS(partial_color(family, Subspace::full(47)), InvalidInput);
  Matrix rows = Matrix::Identity(20, 48);
  CHECK_THROWS_AS(partial_color(family, nullspace(rows)), InvalidInput);
  family[0] = family[0] * 3.0;
  CHECK_THROWS_AS(partial_color(family, Subspace::full(48)), InvalidInput);
  const auto small = testing::whitened_family(3, 20, 31);
  CHECK_THROWS_AS(partial_color(small, Subspace::full(20)), InvalidInput);
}

}

TEST_SUITE("matrix_walk") {

TEST_CASE("completed colorings are full and never beat the exhaustive optimum") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<Vector> d(8, Vector(3));
    Vector tot = Vector::Zero(3);
    for (auto& v : d) {
      for (Index k = 0; k < 3; ++k) v(k) = U(rng);
      tot += v.cwiseAbs();
    }
    std::vector<SymMatrix> fam;
    for (auto& v : d) fam.push_back(SymMatrix::diagonal(v.cwiseQuotient(tot)));
    PartialColorOptions o;
    o.min_size = 1;
    const FullColoring fc = complete_coloring(fam, Subspace::full(8), o);
    CHECK((fc.x.array().abs() == 1.0).all());
    CHECK(fc.rounds >= 1);
    double best = INFINITY;
    for (int mask = 0; mask < 256; ++mask) {
      Vector x(8);
      for (int i = 0; i < 8; ++i) x(i) = (mask >> i) & 1 ? -1.0 : 1.0;
      Matrix s = Matrix::Zero(3, 3);
      for (int i = 0; i < 8; ++i) s += x(i) * fam[static_cast<size_t>(i)].dense();
      best = std::min(best, s.diagonal().cwiseAbs().maxCoeff());
    }
    CHECK(fc.norm >= best - 1e-12);
    CHECK(fc.norm <= 1.0 + 1e-12);
  }
}

}
