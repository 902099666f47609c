#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "rigidkit/graph.hpp"
#include "test_helpers.hpp"

using namespace rigidkit;

TEST_CASE("graph invariants are enforced at construction") {
  CHECK_THROWS_AS(DirectedGraph(0, {}), InvalidGraph);
  CHECK_THROWS_AS(DirectedGraph(2, {{0, 0}}), InvalidGraph);
  CHECK_THROWS_AS(DirectedGraph(2, {{0, 1}, {0, 1}}), InvalidGraph);
  CHECK_THROWS_AS(DirectedGraph(2, {{0, 2}}), InvalidGraph);
  CHECK_NOTHROW(DirectedGraph(2, {{0, 1}, {1, 0}}));  // antiparallel pair is fine
}

TEST_CASE("adjacency matrix puts -1 on directed edges") {
  const DirectedGraph g = two_cycles_graph();
  const Eigen::MatrixXi a = adjacency_matrix(g);
  Eigen::MatrixXi expected = Eigen::MatrixXi::Zero(4, 4);
  expected(0, 1) = expected(1, 2) = expected(2, 0) = expected(3, 2) = expected(0, 3) = -1;
  CHECK(a == expected);

  CHECK(adjacency_matrix(DirectedGraph(3, {})) == Eigen::MatrixXi::Zero(3, 3));

  const Eigen::MatrixXi single = adjacency_matrix(DirectedGraph(2, {{0, 1}}));
  Eigen::MatrixXi single_expected(2, 2);
  single_expected << 0, -1, 0, 0;
  CHECK(single == single_expected);
}

TEST_CASE("edge adjacency matrix of the two-cycles is bit-exact") {
  CHECK(edge_adjacency_matrix(two_cycles_graph()) ==
        testutil::two_cycles_edge_adjacency_expected());

  const Eigen::MatrixXi single = edge_adjacency_matrix(DirectedGraph(2, {{0, 1}}));
  CHECK(single.rows() == 1);
  CHECK(single(0, 0) == -1);

  const Eigen::MatrixXi path = edge_adjacency_matrix(DirectedGraph(3, {{0, 1}, {1, 2}}));
  Eigen::MatrixXi path_expected(2, 2);
  path_expected << -1, 1, 0, -1;
  CHECK(path == path_expected);
}

TEST_CASE("mixed adjacency matrix of the two-cycles is bit-exact") {
  CHECK(mixed_adjacency_matrix(two_cycles_graph()) ==
        testutil::two_cycles_mixed_expected());

  const Eigen::MatrixXi single = mixed_adjacency_matrix(DirectedGraph(2, {{0, 1}}));
  Eigen::MatrixXi single_expected(1, 2);
  single_expected << -1, 1;
  CHECK(single == single_expected);
}

TEST_CASE("adjacency operators satisfy their sum rules on random graphs") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = Rng::derive(42, seed);
    const DirectedGraph g = testutil::random_graph(rng);
    const Eigen::MatrixXi a = adjacency_matrix(g);
    const Eigen::MatrixXi am = mixed_adjacency_matrix(g);
    const Eigen::MatrixXi ae = edge_adjacency_matrix(g);
    for (int v = 0; v < g.n(); ++v) {
      CHECK(a.col(v).sum() == -invalence(g, v));
      CHECK(a.row(v).sum() == -outvalence(g, v));
    }
    for (int l = 0; l < g.m(); ++l) {
      CHECK(am.row(l).sum() == 0);
      CHECK((am.row(l).array() == -1).count() == 1);
      CHECK((am.row(l).array() == 1).count() == 1);
      CHECK(ae(l, l) == -1);
    }
    // pure functions of (n, edge list)
    CHECK(adjacency_matrix(g) == a);
    CHECK(mixed_adjacency_matrix(g) == am);
    CHECK(edge_adjacency_matrix(g) == ae);
  }
}

TEST_CASE("kron2 doubles dimensions blockwise") {
  Eigen::MatrixXi one(1, 1);
  one << 1;
  CHECK(kron2(one) == Eigen::MatrixXi::Identity(2, 2));

  Eigen::MatrixXi row(1, 2);
  row << -1, 1;
  Eigen::MatrixXi expected(2, 4);
  expected << -1, 0, 1, 0, 0, -1, 0, 1;
  CHECK(kron2(row) == expected);
}

TEST_CASE("kron2 respects the mixed product identity") {
  Rng rng = Rng::derive(7, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = rng.uniform_int(1, 4);
    const int q = rng.uniform_int(1, 4);
    const int r = rng.uniform_int(1, 4);
    Eigen::MatrixXi a(p, q), b(q, r);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < q; ++j) a(i, j) = rng.uniform_int(-3, 3);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < r; ++j) b(i, j) = rng.uniform_int(-3, 3);
    CHECK(kron2(a) * kron2(b) == kron2((a * b).eval()));
  }
}

TEST_CASE("agent classification follows the valences") {
  const AgentClassification two_cycles = classify_agents(two_cycles_graph());
  for (AgentRole r : two_cycles.roles) CHECK(r == AgentRole::Coleader);
  CHECK(two_cycles.is_leaderless);
  CHECK(two_cycles.warnings.empty());

  const AgentClassification pair = classify_agents(DirectedGraph(2, {{0, 1}}));
  CHECK(pair.roles[0] == AgentRole::Follower);
  CHECK(pair.roles[1] == AgentRole::Leader);
  CHECK_FALSE(pair.is_leaderless);
}

TEST_CASE("outvalence above two onto a minimally rigid rest is flagged") {
  // agent 3 follows all three vertices of a triangle
  const DirectedGraph g(4, {{0, 1}, {1, 3}, {3, 0}, {2, 0}, {2, 1}, {2, 3}});
  const AgentClassification cls = classify_agents(g);
  CHECK(cls.roles[2] == AgentRole::Follower);
  REQUIRE(cls.warnings.size() == 1);
  CHECK(cls.warnings[0].find("outvalence > 2 onto minimally rigid subgraph") !=
        std::string::npos);
}

TEST_CASE("valence counts") {
  const DirectedGraph g = two_cycles_graph();
  CHECK(outvalence(g, 0) == 2);
  CHECK(invalence(g, 0) == 1);
  const DirectedGraph isolated(3, {{0, 1}});
  CHECK(outvalence(isolated, 2) == 0);
  CHECK(invalence(isolated, 2) == 0);
  CHECK(outvalence(isolated, 0) == 1);
  CHECK(invalence(isolated, 0) == 0);
}

TEST_CASE("graph files round-trip and reject junk") {
  const DirectedGraph g = testutil::load_fixture("two_cycles.graph");
  CHECK(g == two_cycles_graph());

  std::ostringstream out;
  write_graph(out, g);
  std::istringstream in(out.str());
  CHECK(parse_graph(in) == g);

  std::istringstream missing_n("e 1 2\n");
  CHECK_THROWS_AS(parse_graph(missing_n), ParseError);
  std::istringstream bad_tag("n 2\nq 1 2\n");
  CHECK_THROWS_AS(parse_graph(bad_tag), ParseError);
  std::istringstream out_of_range("n 2\ne 1 3\n");
  CHECK_THROWS_AS(parse_graph(out_of_range), ParseError);
}

TEST_CASE("antiparallel pairs collapse to one undirected edge") {
  const DirectedGraph g(3, {{0, 1}, {1, 0}, {1, 2}});
  CHECK(undirected_edges(g).size() == 2);
  CHECK(antiparallel_pair_count(g) == 1);
}
