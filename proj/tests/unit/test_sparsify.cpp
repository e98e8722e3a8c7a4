#include <doctest.h>

#include "builders.hpp"
#include "discwalk/errors.hpp"
#include "discwalk/sparsify.hpp"
#include "discwalk/verify.hpp"

#include <cmath>

using namespace discwalk;
using discwalk::testing::Rng;

TEST_SUITE("sparsify") {

TEST_CASE("degree subspace") {
  const Graph star = testing::star_graph(3);
  CHECK(degree_subspace(star, Vector::Ones(3)).dim() == 0);

  const Graph c4 = testing::cycle_graph(4);  // edges (0,1) (1,2) (2,3) (0,3)
  Vector alt(4);
  alt << 1, -1, 1, -1;
  CHECK(degree_subspace(c4, Vector::Ones(4)).residual(alt) <= 1e-12);

  const Graph g = testing::random_graph(10, 30, 61);
  const Subspace H = degree_subspace(g, Vector::Ones(30));
  CHECK(H.dim() >= 20);
  CHECK((degree_rows(g, Vector::Ones(30)) * H.basis()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("small families are returned unchanged") {
  const Graph g = testing::complete_graph(16);
  const GraphSparsifier r = spectral_sparsify(g, 0.5);
  CHECK(r.rounds == 0);
  CHECK(r.scales == Vector::Ones(g.edge_count()));
  CHECK(r.graph.edge_count() == 120);
  CHECK(r.measured_eps == 0.0);
  CHECK(r.threshold == doctest::Approx(1024.0 * 16 / 0.25));
}

TEST_CASE("halving loop on K20 keeps every per-round invariant") {
  const Graph g = testing::complete_graph(20);
  const auto vs = testing::laplacian_family_vectors(g);
  const DoubledFamily fam = DoubledFamily::rank_one(vs, Vector::Ones(190));
  const Subspace H = degree_subspace(g, Vector::Ones(190));
  SparsifyOptions o;
  o.c_support = 2;
  std::vector<SparsifyRound> rounds;
  o.observer = [&](const SparsifyRound& r) { rounds.push_back(r); };
  const SparsifyResult r = sparsify(fam, H, 0.5, o);
  REQUIRE(!rounds.empty());
  for (const auto& rd : rounds) {
    CHECK(rd.support_before - rd.support_after >= (rd.support_before + 7) / 8);
    CHECK(rd.h_residual <= 1e-7);
    CHECK(rd.sum_lambda_max <= 2 + 1e-6);
    CHECK(rd.min_weight >= 0);
  }
  CHECK(static_cast<double>(r.weights.support_size()) <= r.threshold);
  CHECK(r.measured_eps <= 0.5);
  const Graph h = reweighted(g, r.weights.s);
  CHECK(degree_deviation(g, h) <= 1e-6);
  CHECK(check_spectral(g, h, 0.5).pass);
  for (Index i = 0; i < 190; ++i) CHECK((r.weights.s(i) == 0.0 || r.weights.s(i) > 0));
}

TEST_CASE("too small a support constant exhausts the degree subspace") {
  const Graph g = testing::complete_graph(20);
  SparsifyOptions o;
  o.c_support = 1;
  CHECK_THROWS_AS(spectral_sparsify(g, 0.5, o), SubspaceExhausted);
}

TEST_CASE("sparsify input contract") {
  std::vector<SymMatrix> fam = {SymMatrix::identity(2) * 0.6, SymMatrix::identity(2) * 0.6};
  CHECK_THROWS_AS(sparsify(fam, Subspace::full(2), 0.5), InvalidInput);
  Vector d(2);
  d << -0.5, 0.5;
  std::vector<SymMatrix> neg = {SymMatrix::diagonal(d)};
  CHECK_THROWS_AS(sparsify(neg, Subspace::full(1), 0.5), InvalidInput);
  CHECK_THROWS_AS(sparsify(std::vector<SymMatrix>{SymMatrix::identity(2) * 0.5}, Subspace::full(1), 0.0),
                  InvalidInput);
  CHECK_NOTHROW(sparsify_symmetric(neg, Subspace::full(1), 0.5));
  CHECK_THROWS_AS(sparsify_symmetric({SymMatrix::diagonal(d * 2.5)}, Subspace::full(1), 0.5), InvalidInput);
  CHECK_THROWS_AS(spectral_sparsify(Graph(4, {{0, 1, 1.0}, {2, 3, 1.0}}), 0.5), InvalidInput);
}

TEST_CASE("unit-circle family sums to the identity") {
  for (const Graph& g : {testing::complete_graph(5), testing::complete_bipartite(3, 4)}) {
    const Index n = g.n();
    const SymMatrix RL = matrix_function(laplacian(g), SpectralFunction::PinvSqrt);
    const SymMatrix RU = matrix_function(unsigned_laplacian(g), SpectralFunction::PinvSqrt);
    Matrix sum = Matrix::Zero(2 * n, 2 * n);
    for (const auto& e : g.edges()) {
      Vector f(2 * n), h(2 * n);
      f << RL.dense() * incidence(n, e.u, e.v), Vector::Zero(n);
      h << Vector::Zero(n), RU.dense() * unsigned_incidence(n, e.u, e.v);
      sum += f * f.transpose() + h * h.transpose();
    }
    Matrix proj = Matrix::Zero(2 * n, 2 * n);
    proj.topLeftCorner(n, n) = Matrix::Identity(n, n) - Matrix::Ones(n, n) / static_cast<double>(n);
    const Matrix Uk = kernel_basis(unsigned_laplacian(g));
    proj.bottomRightCorner(n, n) = Matrix::Identity(n, n) - Uk * Uk.transpose();
    CHECK((sum - proj).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(bipartition(g).has_value() == (Uk.cols() == 1));
  }
}

TEST_CASE("unit-circle sparsifier on K16") {
  const Graph g = testing::complete_graph(16);
  const GraphSparsifier r = uc_sparsify(g, 0.5);
  CHECK(r.measured_eps <= 0.5);
  CHECK(r.unsigned_eps <= 0.5);
  CHECK(check_uc_undirected(g, r.graph, 0.5).pass);
}

TEST_CASE("singular-value sparsifier on an expander") {
  const Graph k44 = testing::complete_bipartite(4, 4);
  const GraphSparsifier r = sv_sparsify_expander(k44, 1.0, 0.5);
  CHECK(r.family_norm == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(degree_deviation(k44, r.graph) <= 1e-6);
  const GraphSparsifier half = sv_sparsify_expander(k44, 0.5, 0.5);
  CHECK(half.family_norm == doctest::Approx(0.5).epsilon(1e-8));
  CHECK_THROWS_AS(sv_sparsify_expander(testing::complete_graph(5), 0.5, 0.5), InvalidInput);
  CHECK_THROWS_AS(sv_sparsify_expander(k44, 1.5, 0.5), InvalidInput);
}

TEST_CASE("admissible scale keeps the family below the identity") {
  CHECK(sv_admissible_lambda(testing::complete_bipartite(4, 4)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sv_admissible_lambda(testing::complete_bipartite(3, 5)) == doctest::Approx(normalized_lambda2(testing::complete_bipartite(3, 5))).epsilon(1e-9));
  const Graph g = testing::random_bipartite(6, 9, 0.5, 3);
  REQUIRE(is_connected(g));
  const double lam = sv_admissible_lambda(g);
  CHECK(lam <= normalized_lambda2(g) + 1e-12);
  const GraphSparsifier r = sv_sparsify_expander(g, normalized_lambda2(g), 0.5);
  CHECK(r.family_scale == doctest::Approx(lam).epsilon(1e-12));
  CHECK(r.family_norm <= 1.0 + 1e-9);
  // kernel of E is spanned by the all-ones and the signed side indicator
  const auto side = *bipartition(g);
  Vector sgn(g.n());
  for (Index v = 0; v < g.n(); ++v) sgn(v) = side[static_cast<size_t>(v)] ? -1.0 : 1.0;
  const Matrix E = sv_error_matrices(g).first.dense();
  CHECK((E * Vector::Ones(g.n())).norm() <= 1e-9);
  CHECK((E * sgn).norm() <= 1e-9);
  CHECK(kernel_basis(sv_error_matrices(g).first).cols() == 2);
}

TEST_CASE("singular-value sparsifier of directed graphs") {
  const Graph empty(4, {}, true);
  CHECK(sv_sparsify(empty, 0.5).graph.edge_count() == 0);
  const Graph cyc(6, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}, {5, 0, 1.0}}, true);
  const SvSparsifier r = sv_sparsify(cyc, 0.5);
  CHECK(r.graph.directed());
  CHECK(check_sv(cyc, r.graph, 0.5).pass);
  CHECK_THROWS_AS(sv_sparsify(testing::complete_graph(4), 0.5), InvalidInput);
}

}
