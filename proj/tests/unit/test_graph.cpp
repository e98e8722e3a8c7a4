#include <doctest.h>

#include "builders.hpp"
#include "discwalk/errors.hpp"
#include "discwalk/graph.hpp"

#include <cmath>
#include <set>

using namespace discwalk;

namespace {

void check_decomposition(const Graph& g, const Decomposition& d) {
  std::vector<int> seen(static_cast<size_t>(g.edge_count()), 0);
  Index total = 0;
  for (const auto& p : d.pieces) {
    total += static_cast<Index>(p.edges.size());
    for (Index e : p.edges) ++seen[static_cast<size_t>(e)];
    CHECK(p.lambda2 >= d.phi_target - 1e-9);
    const Subgraph sub = edge_subgraph(g, p.edges);
    CHECK(normalized_lambda2(sub.graph) == doctest::Approx(p.lambda2).epsilon(1e-9));
  }
  CHECK(total == g.edge_count());
  for (int s : seen) CHECK(s == 1);
  CHECK(static_cast<double>(d.max_multiplicity) <= 4 * std::log2(std::max<double>(2, g.n())) + 1);
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("graph invariants") {
  CHECK_THROWS_AS(Graph(3, {{1, 1, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph(3, {{0, 3, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph(3, {{0, 1, 0.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph(3, {{0, 1, std::nan("")}}), InvalidInput);
  const Graph g(3, {{2, 0, 1.5}});
  CHECK(g.edge(0).u == 0);
  CHECK(g.edge(0).v == 2);
  const Graph d(3, {{2, 0, 1.5}}, true);
  CHECK(d.edge(0).u == 2);
}

TEST_CASE("single edge matrices") {
  const GraphMatrices gm = graph_matrices(Graph(2, {{0, 1, 1.0}}));
  CHECK(gm.laplacian(0, 0) == 1.0);
  CHECK(gm.laplacian(0, 1) == -1.0);
  CHECK(gm.unsigned_laplacian(0, 1) == 1.0);
  CHECK(gm.unsigned_laplacian(1, 1) == 1.0);
  CHECK(gm.adjacency(0, 1) == 1.0);
  CHECK(gm.degree(1, 1) == 1.0);
  CHECK_THROWS_AS(graph_matrices(Graph(2, {{0, 1, 1.0}}, true)), InvalidInput);
}

TEST_CASE("complete graph normalized spectrum") {
  const Vector l3 = eigh(normalized_laplacian(testing::complete_graph(3))).values;
  CHECK(std::abs(l3(0)) <= 1e-12);
  CHECK(l3(1) == doctest::Approx(1.5));
  CHECK(l3(2) == doctest::Approx(1.5));
  CHECK(normalized_lambda2(testing::complete_graph(12)) == doctest::Approx(12.0 / 11.0));
  CHECK(normalized_lambda2(testing::complete_bipartite(4, 4)) == doctest::Approx(1.0));
}

TEST_CASE("components and bipartition") {
  const Graph g(5, {{0, 1, 1.0}, {3, 4, 1.0}});
  const auto comps = connected_components(g);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<Index>{0, 1});
  CHECK(comps[1] == std::vector<Index>{2});
  CHECK(comps[2] == std::vector<Index>{3, 4});
  CHECK(!is_connected(g));
  CHECK(bipartition(testing::cycle_graph(6)).has_value());
  CHECK(!bipartition(testing::cycle_graph(5)).has_value());
}

TEST_CASE("bipartite lift") {
  const Graph one(2, {{0, 1, 1.0}}, true);
  const Graph l = bipartite_lift(one);
  CHECK(!l.directed());
  CHECK(l.n() == 4);
  REQUIRE(l.edge_count() == 1);
  CHECK(l.edge(0).u == 0);
  CHECK(l.edge(0).v == 3);

  const Graph tri(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}, true);
  CHECK(bipartite_lift(tri).edge_count() == 3);
  CHECK(connected_components(bipartite_lift(tri)).size() == 3);
  const Graph both(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}, {2, 0, 1.0}, {0, 2, 1.0}}, true);
  const Graph c6 = bipartite_lift(both);
  CHECK(c6.n() == 6);
  CHECK(c6.edge_count() == 6);
  CHECK(is_connected(c6));
  CHECK((c6.degrees().array() == 2.0).all());

  const Graph d = testing::rotational_tournament16(3);
  const Vector lam = eigh(normalized_laplacian(bipartite_lift(d))).values;
  const Index n = lam.size();
  for (Index i = 0; i < n; ++i) CHECK(lam(n - 1 - i) == doctest::Approx(2.0 - lam(i)).epsilon(1e-9));

  Vector s = Vector::Ones(d.edge_count());
  s(0) = 2.5;
  const Graph back = unlift(d, s);
  CHECK(back.directed());
  CHECK(back.edge(0).w == 2.5);
}

TEST_CASE("singular-value error matrices") {
  const auto [E, F] = sv_error_matrices(Graph(2, {{0, 1, 1.0}}, true));
  CHECK(E.dense().cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(F.dense().cwiseAbs().maxCoeff() <= 1e-15);

  const Graph cyc(5, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {4, 0, 1.0}}, true);
  const auto [Ec, Fc] = sv_error_matrices(cyc);
  CHECK((Ec.dense() - Fc.dense()).cwiseAbs().maxCoeff() <= 1e-12);

  const Graph t = testing::tournament_union16(1, 2);
  const auto [Et, Ft] = sv_error_matrices(t);
  CHECK(lambda_min(Et) >= -1e-8 * std::max(1.0, operator_norm(Et)));
  CHECK(lambda_min(Ft) >= -1e-8 * std::max(1.0, operator_norm(Ft)));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph b = testing::random_bipartite(5, 6, 0.7, 500 + seed);
    if (!is_connected(b)) continue;
    const auto side = *bipartition(b);
    const SymMatrix Eb = sv_error_matrices(b).first;
    Vector signed_side(b.n());
    for (Index v = 0; v < b.n(); ++v) signed_side(v) = side[static_cast<size_t>(v)] == 0 ? 1.0 : -1.0;
    CHECK((Eb.dense() * Vector::Ones(b.n())).norm() <= 1e-9);
    CHECK((Eb.dense() * signed_side).norm() <= 1e-9);
    CHECK(lambda_min(Eb) >= -1e-8 * std::max(1.0, operator_norm(Eb)));
  }
}

TEST_CASE("expander decomposition examples") {
  const Graph k12 = testing::complete_graph(12);
  const Decomposition d12 = expander_decompose(k12, 0.1);
  CHECK(d12.pieces.size() == 1);
  check_decomposition(k12, d12);

  const Graph bell = testing::dumbbell(8);
  const Decomposition db = expander_decompose(bell, 0.1);
  CHECK(db.pieces.size() >= 2);
  check_decomposition(bell, db);

  CHECK(expander_decompose(Graph(4, {})).pieces.empty());
  CHECK_THROWS_AS(expander_decompose(k12, 2.5), InvalidInput);
  CHECK_THROWS_AS(expander_decompose(k12, 0.0), InvalidInput);
}

TEST_CASE("expander decomposition properties on random graphs") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Graph g = testing::random_graph(20, 25 + 5 * static_cast<Index>(seed), 600 + seed);
    check_decomposition(g, expander_decompose(g, 0.05 + 0.02 * static_cast<double>(seed % 5)));
    check_decomposition(g, expander_decompose(g));
  }
}

TEST_CASE("default expansion target") {
  CHECK(default_phi_target(16) == doctest::Approx(1.0 / 64));
  CHECK(default_phi_target(1) == doctest::Approx(0.25));
}

}
