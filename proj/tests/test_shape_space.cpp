#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rigidkit/shape_space.hpp"
#include "test_helpers.hpp"

using namespace rigidkit;
using Catch::Approx;

namespace {

Eigen::Matrix3d affine(const Se2& g) {
  Eigen::Matrix3d m;
  m << std::cos(g.theta), std::sin(g.theta), g.a,
      -std::sin(g.theta), std::cos(g.theta), g.b,
      0.0, 0.0, 1.0;
  return m;
}

Framework interior_two_cycles(const std::vector<int>& choices = {0, 0}) {
  const DirectedGraph g = two_cycles_graph();
  const auto plan = plan_vertex_add(g);
  Eigen::VectorXd d(5);
  d << 1.0, 1.2, 1.5, 0.9, 1.1;
  return realize_plan(g, *plan, d, choices);
}

double max_vertex_distance(const Framework& a, const Framework& b) {
  double dev = 0.0;
  for (int v = 0; v < a.n(); ++v)
    dev = std::max(dev, (a.position(v) - b.position(v)).norm());
  return dev;
}

}  // namespace

TEST_CASE("rigid motions act as isometries") {
  Rng rng = Rng::derive(21, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const DirectedGraph g = testutil::random_graph(rng);
    const Framework f = testutil::random_framework(g, rng);
    const Se2 motion{rng.uniform(-6.0, 6.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const Framework moved = apply_se2(motion, f);
    for (int i = 0; i < g.n(); ++i)
      for (int j = i + 1; j < g.n(); ++j) {
        const double before = (f.position(i) - f.position(j)).norm();
        const double after = (moved.position(i) - moved.position(j)).norm();
        CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, before));
      }
  }
}

TEST_CASE("identity and translations leave shape data alone") {
  const Framework f = interior_two_cycles();
  const Framework same = apply_se2(Se2{0.0, 0.0, 0.0}, f);
  CHECK(max_vertex_distance(f, same) == 0.0);

  const Framework shifted = apply_se2(Se2{0.0, 2.5, -1.25}, f);
  CHECK((distance_function(shifted) - distance_function(f)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("composition is the affine matrix product") {
  Rng rng = Rng::derive(22, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Se2 g1{rng.uniform(-3.0, 3.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const Se2 g2{rng.uniform(-3.0, 3.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const Se2 composed = compose(g1, g2);
    CHECK((affine(g1) * affine(g2) - affine(composed)).cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::Vector2d x(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    CHECK((g1.apply(g2.apply(x)) - composed.apply(x)).norm() <= 1e-12);

    const Se2 inv = inverse(g1);
    CHECK(inv.apply(g1.apply(x)).isApprox(x, 1e-12));
  }
}

TEST_CASE("canonical form is a fixed point on already-canonical input") {
  const Framework canon_triangle(triangle_graph(),
                                 {{0.0, 0.0}, {3.0, 0.0}, {1.0, 2.0}});
  const CanonicalForm c = canonical_form(canon_triangle);
  CHECK(max_vertex_distance(c.framework, canon_triangle) <= 1e-12);
  CHECK_FALSE(c.on_axis);
}

TEST_CASE("canonical form is invariant along group orbits") {
  Rng rng = Rng::derive(23, 0);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const DirectedGraph g = testutil::random_graph(rng);
    const Framework f = testutil::random_framework(g, rng);
    if (totally_coincidental(f)) continue;
    const Se2 motion{rng.uniform(-6.0, 6.0), rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    const Framework moved = apply_se2(motion, f);
    const Framework ca = canonical_form(f).framework;
    const Framework cb = canonical_form(moved).framework;
    CHECK(max_vertex_distance(ca, cb) <= 1e-9 * std::max(1.0, diameter(ca)));
    CHECK(are_congruent(f, moved));
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("canonicalization skips vertices that sit on the base point") {
  const Framework f(triangle_graph(), {{1.0, 1.0}, {1.0, 1.0}, {2.0, 3.0}});
  const CanonicalForm c = canonical_form(f);
  CHECK(c.framework.position(0).norm() <= 1e-12);
  CHECK(c.framework.position(1).norm() <= 1e-12);
  CHECK(c.framework.position(2).y() == Approx(0.0).margin(1e-12));
  CHECK(c.framework.position(2).x() > 0.0);
}

TEST_CASE("congruence distinguishes mirror images for generic frameworks") {
  Rng rng = Rng::derive(24, 0);
  int generic_count = 0;
  for (int trial = 0; trial < 300 && generic_count < 50; ++trial) {
    const DirectedGraph g = testutil::random_graph(rng, 6);
    if (g.n() < 3) continue;
    const Framework f = testutil::random_framework(g, rng);
    if (totally_coincidental(f)) continue;
    CHECK(are_congruent(f, f));
    CHECK(are_congruent(f, mirror(f), true));

    // only claim mirror distinction when some vertex sits clearly off the
    // canonical axis
    const Framework canon = canonical_form(f).framework;
    double off_axis = 0.0;
    for (int v = 0; v < canon.n(); ++v)
      off_axis = std::max(off_axis, std::abs(canon.position(v).y()));
    if (off_axis < 1e-3) continue;
    ++generic_count;
    CHECK_FALSE(are_congruent(f, mirror(f), false));
  }
  CHECK(generic_count == 50);
}

TEST_CASE("congruence requires matching graphs") {
  const Framework a(triangle_graph(), {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  const Framework b(DirectedGraph(3, {{0, 1}, {1, 2}}), {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(are_congruent(a, b), GraphMismatch);
}

TEST_CASE("mirror is an involution preserving edge data") {
  const Framework f = interior_two_cycles();
  CHECK(max_vertex_distance(mirror(mirror(f)), f) == 0.0);
  CHECK((distance_function(mirror(f)) - distance_function(f)).cwiseAbs().maxCoeff() <=
        1e-12);

  const Framework flat(DirectedGraph(3, {{0, 1}, {1, 2}}),
                       {{0.0, 0.0}, {1.0, 0.0}, {2.5, 0.0}});
  CHECK(max_vertex_distance(mirror(flat), flat) == 0.0);
}

TEST_CASE("normalization fixes the edge-length sum") {
  const Framework eq(triangle_graph(),
                     {{0.0, 0.0}, {2.0, 0.0}, {1.0, std::sqrt(3.0)}});
  const Normalized n = normalize(eq);
  CHECK(n.scale == Approx(6.0));
  for (int l = 0; l < 3; ++l)
    CHECK(edge_lengths(n.framework)(l) == Approx(1.0 / 3.0));

  const Normalized again = normalize(n.framework);
  CHECK(again.scale == Approx(1.0));
  CHECK(max_vertex_distance(again.framework, n.framework) <= 1e-12);

  const Framework right(triangle_graph(), {{0.0, 0.0}, {3.0, 0.0}, {3.0, 4.0}});
  CHECK(normalize(right).scale == Approx(12.0));

  // componentwise: scale * normalized lengths = original lengths
  const Eigen::VectorXd back = normalize(right).scale * edge_lengths(normalize(right).framework);
  CHECK((back - edge_lengths(right)).cwiseAbs().maxCoeff() <= 1e-12 * 12.0);

  CHECK_THROWS_AS(normalize(Framework(DirectedGraph(2, {}), {{0, 0}, {1, 1}})),
                  ZeroPerimeter);
}

TEST_CASE("triangle feasibility from the inequality system") {
  const DirectedGraph tri = triangle_graph();
  Eigen::VectorXd d(3);
  d << 3, 4, 5;
  CHECK(edge_length_feasible(tri, d).cls == Feasibility::Interior);
  CHECK_FALSE(edge_length_feasible(tri, d).approximate);
  d << 1, 1, 3;
  CHECK(edge_length_feasible(tri, d).cls == Feasibility::Infeasible);
  d << 1, 1, 2;
  CHECK(edge_length_feasible(tri, d).cls == Feasibility::Boundary);
}

TEST_CASE("two-cycles feasibility from the two triangle systems") {
  const DirectedGraph g = two_cycles_graph();
  Eigen::VectorXd d(5);
  d << 1.0, 1.2, 1.5, 0.9, 1.1;
  CHECK(edge_length_feasible(g, d).cls == Feasibility::Interior);
  d << 1.0, 1.2, 5.0, 0.9, 1.1;  // axis too long for both triangles
  CHECK(edge_length_feasible(g, d).cls == Feasibility::Infeasible);
  d << 1.0, 1.2, 2.2, 0.9, 1.3;  // first triangle degenerates
  CHECK(edge_length_feasible(g, d).cls == Feasibility::Boundary);
}

TEST_CASE("vertex-add graphs are decided by realization sweep") {
  const HennebergSequence seq = random_sequence(5, 17, true);
  const DirectedGraph g = apply_sequence(seq);
  const auto plan = plan_vertex_add(g);
  REQUIRE(plan.has_value());
  Rng rng = Rng::derive(25, 0);
  const Eigen::VectorXd d = testutil::random_feasible_lengths(g, *plan, rng);
  const FeasibilityResult res = edge_length_feasible(g, d);
  CHECK(res.cls == Feasibility::Interior);
  CHECK_FALSE(res.approximate);

  // scaling one length far beyond the others kills feasibility
  Eigen::VectorXd bad = d;
  bad(0) = 100.0 * d.maxCoeff();
  CHECK(edge_length_feasible(g, bad).cls == Feasibility::Infeasible);
}

TEST_CASE("non vertex-add graphs fall back to the numeric realizer") {
  const DirectedGraph k4 = testutil::load_fixture("k4.graph");
  Rng rng = Rng::derive(26, 0);
  const Framework f = testutil::random_framework(k4, rng);
  const FeasibilityResult res = edge_length_feasible(k4, edge_lengths(f));
  CHECK(res.cls == Feasibility::Interior);
  CHECK(res.approximate);
}

TEST_CASE("enumeration counts on the closed-form fixtures") {
  Eigen::VectorXd tri_d(3);
  tri_d << 3, 4, 5;
  const auto triangles = enumerate_frameworks(triangle_graph(), tri_d);
  CHECK(triangles.size() == 2);
  CHECK(are_congruent(triangles[0], triangles[1], true));
  CHECK_FALSE(are_congruent(triangles[0], triangles[1], false));

  Eigen::VectorXd d(5);
  d << 1.0, 1.2, 1.5, 0.9, 1.1;
  const auto frameworks = enumerate_frameworks(two_cycles_graph(), d);
  CHECK(frameworks.size() == 4);
  for (const Framework& f : frameworks)
    CHECK((edge_lengths(f) - d).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("enumeration covers every realization branch") {
  const HennebergSequence seq = random_sequence(6, 4, true);
  const DirectedGraph g = apply_sequence(seq);
  const auto plan = plan_vertex_add(g);
  REQUIRE(plan.has_value());
  Rng rng = Rng::derive(27, 0);
  const Eigen::VectorXd d = testutil::random_feasible_lengths(g, *plan, rng);
  const auto reps = enumerate_frameworks(g, d);
  CHECK(static_cast<int>(reps.size()) >= ls_lower_bound(6));
  CHECK(reps.size() % 2 == 0);

  // each representative realizes the lengths; representatives are pairwise
  // non-congruent; every branch is congruent to exactly one representative
  for (std::size_t i = 0; i < reps.size(); ++i) {
    CHECK((edge_lengths(reps[i]) - d).cwiseAbs().maxCoeff() <= 1e-9);
    for (std::size_t j = i + 1; j < reps.size(); ++j)
      CHECK_FALSE(are_congruent(reps[i], reps[j]));
  }
  const int steps = static_cast<int>(plan->steps.size());
  for (unsigned mask = 0; mask < (1u << steps); ++mask) {
    std::vector<int> choices(static_cast<std::size_t>(steps));
    for (int b = 0; b < steps; ++b) choices[static_cast<std::size_t>(b)] = mask >> b & 1u;
    const Framework f = realize_plan(g, *plan, d, choices);
    int matches = 0;
    for (const Framework& r : reps)
      if (are_congruent(f, r)) ++matches;
    CHECK(matches == 1);
  }
}

TEST_CASE("enumeration error paths") {
  Eigen::VectorXd bad(3);
  bad << 1, 1, 3;
  CHECK_THROWS_AS(enumerate_frameworks(triangle_graph(), bad), InfeasibleLengths);
  CHECK_THROWS_AS(enumerate_frameworks(testutil::load_fixture("k4.graph"), bad),
                  NotLaman);
}

TEST_CASE("reflections across the axis edge") {
  const Framework f = interior_two_cycles();
  const auto shape = match_two_cycles(f.graph());
  REQUIRE(shape.has_value());

  const auto r1 = [&](const Framework& x) {
    return reflect_vertices(x, shape->axis_edge, {shape->wing_lo});
  };
  const auto r2 = [&](const Framework& x) {
    return reflect_vertices(x, shape->axis_edge, {shape->wing_hi});
  };

  CHECK(max_vertex_distance(r1(r1(f)), f) <= 1e-12);
  CHECK(max_vertex_distance(r2(r2(f)), f) <= 1e-12);
  CHECK(max_vertex_distance(r1(r2(f)), r2(r1(f))) <= 1e-12);

  const Framework both = r1(r2(f));
  CHECK(are_congruent(both, mirror(f), true));
  // the double reflection is even reachable by a rigid motion alone
  CHECK(are_congruent(both, mirror(f), false));

  CHECK_THROWS_AS(
      reflect_vertices(Framework(DirectedGraph(2, {{0, 1}}), {{1.0, 1.0}, {1.0, 1.0}}), 0,
                       {0}),
      DegenerateAxis);
}

TEST_CASE("the reflection orbit matches the enumeration") {
  const Framework f = interior_two_cycles();
  const auto orbit = symmetry_orbit(f);
  const Eigen::VectorXd base = distance_function(f);
  for (const Framework& member : orbit)
    CHECK((distance_function(member) - base).cwiseAbs().maxCoeff() <= 1e-12);

  const auto reps = enumerate_frameworks(two_cycles_graph(), edge_lengths(f));
  REQUIRE(reps.size() == 4);
  for (const Framework& member : orbit) {
    int matches = 0;
    for (const Framework& rep : reps)
      if (are_congruent(member, rep)) ++matches;
    CHECK(matches == 1);
  }
  // orbit members are pairwise non-congruent, so they hit all four classes
  for (std::size_t i = 0; i < orbit.size(); ++i)
    for (std::size_t j = i + 1; j < orbit.size(); ++j)
      CHECK_FALSE(are_congruent(orbit[i], orbit[j]));

  CHECK_THROWS_AS(symmetry_orbit(Framework(triangle_graph(),
                                           {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}})),
                  GraphMismatch);
}

TEST_CASE("an orbit with a wing on the axis collapses") {
  // place wing 2 on the 1-3 axis: R1 fixes it
  const DirectedGraph g = two_cycles_graph();
  const auto shape = match_two_cycles(g);
  REQUIRE(shape.has_value());
  std::vector<Eigen::Vector2d> pos = {{0.0, 0.0}, {0.4, 0.0}, {1.5, 0.0}, {0.7, 0.9}};
  const Framework f(g, pos);
  const auto orbit = symmetry_orbit(f);
  CHECK(max_vertex_distance(orbit[0], orbit[1]) <= 1e-12);
  CHECK(max_vertex_distance(orbit[2], orbit[3]) <= 1e-12);
}

TEST_CASE("topological bounds") {
  CHECK(ls_lower_bound(3) == 2);
  CHECK(ls_lower_bound(4) == 4);
  CHECK(ls_lower_bound(5) == 4);
  CHECK(ls_lower_bound(6) == 8);
  CHECK(cat_cp(0) == 1);
  CHECK(cat_cp(2) == 3);
}
