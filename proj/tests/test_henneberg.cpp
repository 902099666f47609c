#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "rigidkit/henneberg.hpp"
#include "rigidkit/rigidity.hpp"
#include "rigidkit/shape_space.hpp"
#include "test_helpers.hpp"

using namespace rigidkit;

namespace {

DirectedGraph prism_graph() {
  // 3-regular minimally rigid graph: triangles 0-1-2 and 3-4-5 joined rung
  // by rung; no degree-2 vertex anywhere, so no vertex-add order exists
  return DirectedGraph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3},
                           {0, 3}, {1, 4}, {2, 5}});
}

}  // namespace

TEST_CASE("the empty sequence is a single directed edge") {
  const DirectedGraph g = apply_sequence(HennebergSequence{});
  CHECK(g.n() == 2);
  REQUIRE(g.m() == 1);
  CHECK(g.edge(0) == Edge{0, 1});
}

TEST_CASE("two vertex adds build the two-cycles shape") {
  const HennebergSequence seq({VertexAdd{0, 1}, VertexAdd{0, 1}});
  const DirectedGraph g = apply_sequence(seq);
  CHECK(g.n() == 4);
  CHECK(g.m() == 5);
  CHECK(laman_check(g));
  CHECK(match_two_cycles(g).has_value());
  CHECK(validate(seq));
}

TEST_CASE("an edge split keeps minimal rigidity") {
  const HennebergSequence seq({VertexAdd{0, 1}, EdgeSplit{0, 1, 2}});
  const DirectedGraph g = apply_sequence(seq);
  CHECK(g.n() == 4);
  CHECK(g.m() == 5);
  CHECK(laman_check(g));
  CHECK(outvalence(g, 3) == 3);
  CHECK(validate(seq));
}

TEST_CASE("structurally invalid steps are rejected at construction") {
  CHECK_THROWS_AS(HennebergSequence({VertexAdd{1, 1}}), InvalidStep);
  CHECK_THROWS_AS(HennebergSequence({VertexAdd{0, 2}}), InvalidStep);
  CHECK_THROWS_AS(HennebergSequence({VertexAdd{0, 1}, EdgeSplit{0, 1, 1}}), InvalidStep);
  // splitting a non-existent edge is only detectable while applying
  CHECK_FALSE(validate(HennebergSequence({VertexAdd{0, 1}, EdgeSplit{1, 2, 0},
                                          EdgeSplit{1, 2, 0}})));
}

TEST_CASE("random sequences always validate") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 3 + static_cast<int>(seed % 6);
    const HennebergSequence seq = random_sequence(n, seed);
    const DirectedGraph g = apply_sequence(seq);
    CHECK(g.n() == n);
    CHECK(g.m() == 2 * n - 3);
    CHECK(validate(seq));
  }
}

TEST_CASE("random generation is deterministic in the seed") {
  const HennebergSequence a = random_sequence(7, 123);
  const HennebergSequence b = random_sequence(7, 123);
  CHECK(a.steps() == b.steps());
}

TEST_CASE("four-vertex vertex-add constructions are all the same shape") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DirectedGraph g = apply_sequence(random_sequence(4, seed, true));
    CHECK(match_two_cycles(g).has_value());
  }
  const DirectedGraph tri = apply_sequence(random_sequence(3, 0, true));
  CHECK(tri.n() == 3);
  CHECK(undirected_edges(tri).size() == 3);
}

TEST_CASE("vertex-add order recovery") {
  const auto order = find_vertex_add_order(two_cycles_graph());
  REQUIRE(order.has_value());
  CHECK(order->step_count() == 2);
  CHECK(validate(*order));
  CHECK(match_two_cycles(apply_sequence(*order)).has_value());

  const auto tri_order = find_vertex_add_order(triangle_graph());
  REQUIRE(tri_order.has_value());
  CHECK(tri_order->step_count() == 1);

  CHECK_FALSE(find_vertex_add_order(prism_graph()).has_value());
  CHECK_THROWS_AS(find_vertex_add_order(testutil::load_fixture("k4.graph")), NotLaman);
}

TEST_CASE("order recovery round-trips random vertex-add graphs") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const int n = 3 + static_cast<int>(seed % 5);
    const DirectedGraph g = apply_sequence(random_sequence(n, seed, true));
    const auto order = find_vertex_add_order(g);
    REQUIRE(order.has_value());
    CHECK(validate(*order));
    CHECK(apply_sequence(*order).n() == g.n());
  }
}

TEST_CASE("triangle realization produces the two mirror placements") {
  const HennebergSequence seq({VertexAdd{0, 1}});
  Eigen::VectorXd d(3);
  d << 3.0, 4.0, 5.0;
  const Framework left = realize(seq, d, {0});
  const Framework right = realize(seq, d, {1});
  for (const Framework& f : {left, right})
    CHECK((edge_lengths(f) - d).cwiseAbs().maxCoeff() <= 1e-10 * d.maxCoeff());
  CHECK_FALSE(are_congruent(left, right, false));
  CHECK(are_congruent(left, right, true));
  // bit 0 lands on the counterclockwise side of the base segment
  CHECK(left.position(2).y() > 0.0);
  CHECK(right.position(2).y() < 0.0);
}

TEST_CASE("realization satisfies every constraint tightly") {
  const HennebergSequence seq = random_sequence(5, 99, true);
  const DirectedGraph g = apply_sequence(seq);
  const auto plan = plan_vertex_add(g);
  REQUIRE(plan.has_value());
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng = Rng::derive(31, trial);
    const Eigen::VectorXd d = testutil::random_feasible_lengths(g, *plan, rng);
    for (unsigned mask = 0; mask < 8u; ++mask) {
      const std::vector<int> choices{static_cast<int>(mask & 1u),
                                     static_cast<int>(mask >> 1 & 1u),
                                     static_cast<int>(mask >> 2 & 1u)};
      const Framework f = realize_plan(g, *plan, d, choices);
      for (int l = 0; l < g.m(); ++l)
        CHECK(std::abs(edge_vector(f, l).norm() - d(l)) <= 1e-10 * d(l));
    }
  }
}

TEST_CASE("flipping every choice bit mirrors the framework") {
  const HennebergSequence seq = random_sequence(5, 7, true);
  const DirectedGraph g = apply_sequence(seq);
  const auto plan = plan_vertex_add(g);
  REQUIRE(plan.has_value());
  Rng rng = Rng::derive(32, 0);
  const Eigen::VectorXd d = testutil::random_feasible_lengths(g, *plan, rng);
  const std::vector<int> zeros(plan->steps.size(), 0);
  const std::vector<int> ones(plan->steps.size(), 1);
  const Framework a = realize_plan(g, *plan, d, zeros);
  const Framework b = realize_plan(g, *plan, d, ones);
  CHECK(are_congruent(a, b, true));
  CHECK(are_congruent(a, mirror(b), false));
}

TEST_CASE("infeasible steps report their index") {
  const HennebergSequence seq({VertexAdd{0, 1}});
  Eigen::VectorXd disjoint(3);
  disjoint << 3.0, 1.0, 1.0;
  CHECK_THROWS_AS(realize(seq, disjoint, {0}), CirclesDisjoint);
  Eigen::VectorXd tangent(3);
  tangent << 2.0, 1.0, 1.0;
  CHECK_THROWS_AS(realize(seq, tangent, {0}), CirclesTangent);
  try {
    realize(seq, disjoint, {0});
  } catch (const CirclesDisjoint& e) {
    CHECK(e.step() == 0);
  }
  // tangent steps can be forced through; both choices coincide
  const Framework f = realize(seq, tangent, {0}, RealizeOptions{.allow_tangent = true});
  CHECK(f.position(2).y() == 0.0);

  CHECK_THROWS_AS(realize(HennebergSequence({VertexAdd{0, 1}, EdgeSplit{0, 1, 2}}),
                          Eigen::VectorXd::Ones(5), {0, 0}),
                  NotVertexAddConstructible);
}

TEST_CASE("sequence files round-trip") {
  const HennebergSequence seq({VertexAdd{0, 1}, EdgeSplit{2, 0, 1}, VertexAdd{3, 2}});
  std::ostringstream out;
  write_sequence(out, seq);
  std::istringstream in(out.str());
  const HennebergSequence parsed = parse_sequence(in);
  CHECK(parsed.steps() == seq.steps());

  std::istringstream bad("va 1\n");
  CHECK_THROWS_AS(parse_sequence(bad), ParseError);
}
