#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/framework.hpp"
#include "rigidkit/graph.hpp"
#include "rigidkit/henneberg.hpp"
#include "rigidkit/rigidity.hpp"

namespace rigidkit {

/// Rigid motion of the plane: rotation by theta followed by translation by
/// (a, b). The rotation convention matches the affine matrix
/// [[cos, sin], [-sin, cos]]; composition is the true matrix product, which
/// rotates the second translation (group law, not componentwise addition).
struct Se2 {
  double theta = 0.0;
  double a = 0.0;
  double b = 0.0;

  Eigen::Vector2d rotate(const Eigen::Vector2d& v) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
  }

  Eigen::Vector2d apply(const Eigen::Vector2d& x) const {
    return rotate(x) + Eigen::Vector2d(a, b);
  }
};

inline Se2 compose(const Se2& g1, const Se2& g2) {
  const Eigen::Vector2d t = g1.rotate({g2.a, g2.b}) + Eigen::Vector2d(g1.a, g1.b);
  return {g1.theta + g2.theta, t.x(), t.y()};
}

inline Se2 inverse(const Se2& g) {
  const Se2 r{-g.theta, 0.0, 0.0};
  const Eigen::Vector2d t = r.rotate({g.a, g.b});
  return {-g.theta, -t.x(), -t.y()};
}

inline Framework apply_se2(const Se2& g, const Framework& f) {
  std::vector<Eigen::Vector2d> pos;
  pos.reserve(f.positions().size());
  for (const auto& p : f.positions()) pos.push_back(g.apply(p));
  return Framework(f.graph(), std::move(pos));
}

/// Reflection across the x-axis: (x, y) -> (x, -y). Not a rigid motion; it
/// reverses orientation.
inline Framework mirror(const Framework& f) {
  std::vector<Eigen::Vector2d> pos;
  pos.reserve(f.positions().size());
  for (const auto& p : f.positions()) pos.push_back({p.x(), -p.y()});
  return Framework(f.graph(), std::move(pos));
}

struct CanonicalForm {
  Framework framework;
  /// Every vertex ended up on the x-axis: the framework is its own mirror
  /// image, so no orientation information survives.
  bool on_axis = false;
};

/// Unique representative of the rigid-motion class of f: the first vertex
/// at the origin and the first vertex separated from it on the positive
/// x-axis. Two frameworks are related by a rotation + translation iff their
/// canonical forms coincide; mirror images get y-negated canonical forms.
inline CanonicalForm canonical_form(const Framework& f,
                                    double coincidence_tol = 1e-9) {
  if (totally_coincidental(f))
    throw DegenerateFramework("cannot canonicalize a totally coincidental framework");
  const double diam = diameter(f);
  const Eigen::Vector2d origin = f.position(0);

  int align = -1;
  for (int v = 1; v < f.n(); ++v) {
    if ((f.position(v) - origin).norm() > coincidence_tol * diam) {
      align = v;
      break;
    }
  }
  // totally_coincidental already ruled out the all-equal case
  const Eigen::Vector2d dir = f.position(align) - origin;
  const Se2 motion = {std::atan2(dir.y(), dir.x()), 0.0, 0.0};

  std::vector<Eigen::Vector2d> pos;
  pos.reserve(f.positions().size());
  bool on_axis = true;
  for (const auto& p : f.positions()) {
    const Eigen::Vector2d q = motion.rotate(p - origin);
    if (std::abs(q.y()) > coincidence_tol * diam) on_axis = false;
    pos.push_back(q);
  }
  return {Framework(f.graph(), std::move(pos)), on_axis};
}

/// Same labeled shape up to rotation + translation; with allow_reflection,
/// also up to mirror image. Comparison metric: max vertex distance between
/// canonical forms, default threshold 1e-6 * diameter.
inline bool are_congruent(const Framework& f1, const Framework& f2,
                          bool allow_reflection = false, double tol = -1.0) {
  if (f1.graph() != f2.graph())
    throw GraphMismatch("congruence requires identical graphs");
  const CanonicalForm c1 = canonical_form(f1);
  const CanonicalForm c2 = canonical_form(f2);
  if (tol <= 0.0)
    tol = 1e-6 * std::max(diameter(c1.framework), diameter(c2.framework));

  const auto max_dev = [&](const Framework& a, const Framework& b) {
    double dev = 0.0;
    for (int v = 0; v < a.n(); ++v)
      dev = std::max(dev, (a.position(v) - b.position(v)).norm());
    return dev;
  };
  if (max_dev(c1.framework, c2.framework) <= tol) return true;
  if (allow_reflection &&
      max_dev(c1.framework, mirror(c2.framework)) <= tol)
    return true;
  return false;
}

/// Plain Euclidean edge lengths, in edge order. This is the interchange
/// format; squared and half-squared variants are derived from it.
inline Eigen::VectorXd edge_lengths(const Framework& f) {
  Eigen::VectorXd d(f.m());
  for (int l = 0; l < f.m(); ++l) d(l) = edge_vector(f, l).norm();
  return d;
}

inline Eigen::VectorXd squared_lengths(const Eigen::VectorXd& d) {
  return d.array().square();
}

inline Eigen::VectorXd half_squared_lengths(const Eigen::VectorXd& d) {
  return 0.5 * d.array().square();
}

struct Normalized {
  Framework framework;
  double scale = 0.0;  // original edge-length sum
};

/// Scale the framework so the edge lengths sum to one. Together with the
/// canonical form this puts coordinates on the quotient shape space (one
/// projective factor plus the scale).
inline Normalized normalize(const Framework& f) {
  const double perimeter = edge_lengths(f).sum();
  if (perimeter <= 0.0) throw ZeroPerimeter("framework has no edge of positive length");
  std::vector<Eigen::Vector2d> pos;
  pos.reserve(f.positions().size());
  for (const auto& p : f.positions()) pos.push_back(p / perimeter);
  return {Framework(f.graph(), std::move(pos)), perimeter};
}

/// Structural match of the four-vertex double-triangle graph: two adjacent
/// degree-3 vertices spanning the shared axis edge, two degree-2 wings.
struct TwoCyclesShape {
  int axis_edge = 0;
  int hub_a = 0;  // degree-3 endpoints of the axis, hub_a < hub_b
  int hub_b = 0;
  int wing_lo = 0;  // degree-2 vertices, wing_lo < wing_hi
  int wing_hi = 0;
  std::array<int, 3> triangle_lo{};  // edge indices: axis + the two wing_lo edges
  std::array<int, 3> triangle_hi{};
};

inline std::optional<TwoCyclesShape> match_two_cycles(const DirectedGraph& g) {
  if (g.n() != 4 || g.m() != 5) return std::nullopt;
  const auto und = undirected_edges(g);
  if (und.size() != 5) return std::nullopt;
  std::array<int, 4> degree{};
  for (const auto& [a, b] : und) {
    ++degree[static_cast<std::size_t>(a)];
    ++degree[static_cast<std::size_t>(b)];
  }
  std::vector<int> hubs, wings;
  for (int v = 0; v < 4; ++v)
    (degree[static_cast<std::size_t>(v)] == 3 ? hubs : wings).push_back(v);
  if (hubs.size() != 2 || wings.size() != 2) return std::nullopt;
  if (degree[static_cast<std::size_t>(wings[0])] != 2 ||
      degree[static_cast<std::size_t>(wings[1])] != 2)
    return std::nullopt;

  const auto edge_between = [&](int u, int v) {
    for (int l = 0; l < g.m(); ++l) {
      const Edge& e = g.edge(l);
      if ((e.src == u && e.tgt == v) || (e.src == v && e.tgt == u)) return l;
    }
    return -1;
  };
  TwoCyclesShape shape;
  shape.hub_a = hubs[0];
  shape.hub_b = hubs[1];
  shape.wing_lo = wings[0];
  shape.wing_hi = wings[1];
  shape.axis_edge = edge_between(shape.hub_a, shape.hub_b);
  if (shape.axis_edge < 0) return std::nullopt;
  const int lo_a = edge_between(shape.wing_lo, shape.hub_a);
  const int lo_b = edge_between(shape.wing_lo, shape.hub_b);
  const int hi_a = edge_between(shape.wing_hi, shape.hub_a);
  const int hi_b = edge_between(shape.wing_hi, shape.hub_b);
  if (lo_a < 0 || lo_b < 0 || hi_a < 0 || hi_b < 0) return std::nullopt;
  if (edge_between(shape.wing_lo, shape.wing_hi) >= 0) return std::nullopt;
  shape.triangle_lo = {shape.axis_edge, lo_a, lo_b};
  shape.triangle_hi = {shape.axis_edge, hi_a, hi_b};
  return shape;
}

enum class Feasibility { Interior, Boundary, Infeasible };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Interior: return "interior";
    case Feasibility::Boundary: return "boundary";
    default: return "infeasible";
  }
}

struct FeasibilityResult {
  Feasibility cls = Feasibility::Infeasible;
  /// Set when the decision came from a numerical multistart realization
  /// rather than an exact route.
  bool approximate = false;
};

namespace detail {

enum class TripleClass { Strict, Tight, Violated };

// Triangle inequalities on three lengths, with a relative tolerance band
// around equality.
inline TripleClass classify_triangle(double d1, double d2, double d3) {
  const double tol = 1e-9 * (d1 + d2 + d3);
  TripleClass cls = TripleClass::Strict;
  const double sides[3][3] = {{d1, d2, d3}, {d2, d3, d1}, {d3, d1, d2}};
  for (const auto& s : sides) {
    const double gap = s[1] + s[2] - s[0];
    if (gap < -tol) return TripleClass::Violated;
    if (gap <= tol) cls = TripleClass::Tight;
  }
  for (double v : {d1, d2, d3})
    if (v <= tol && cls == TripleClass::Strict) cls = TripleClass::Tight;
  return cls;
}

// Damped Gauss-Newton on the squared-length residuals. Returns a framework
// whose lengths match d to ~1e-8 relative, or nothing.
inline std::optional<Framework> realize_numeric(const DirectedGraph& g,
                                                const Eigen::VectorXd& d,
                                                std::uint64_t seed, int starts = 8) {
  const int n = g.n();
  const int m = g.m();
  const double scale = std::max(d.maxCoeff(), 1e-12);
  const Eigen::VectorXd dsq = d.array().square();
  for (int attempt = 0; attempt < starts; ++attempt) {
    Rng rng = Rng::derive(seed, 0xcafe0000ULL + static_cast<std::uint64_t>(attempt));
    Eigen::VectorXd x(2 * n);
    for (int i = 0; i < 2 * n; ++i) x(i) = rng.uniform(0.0, 1.5 * scale);
    double lambda = 1e-3;
    for (int iter = 0; iter < 200; ++iter) {
      Framework f = from_state(g, x);
      Eigen::VectorXd r(m);
      for (int l = 0; l < m; ++l) r(l) = edge_vector(f, l).squaredNorm() - dsq(l);
      if (r.cwiseAbs().maxCoeff() < 1e-14 * scale * scale) break;
      const Eigen::MatrixXd j = 2.0 * rigidity_matrix(f);
      const Eigen::MatrixXd h =
          j.transpose() * j + lambda * Eigen::MatrixXd::Identity(2 * n, 2 * n);
      const Eigen::VectorXd step = h.ldlt().solve(-j.transpose() * r);
      const Eigen::VectorXd xn = x + step;
      Framework fn = from_state(g, xn);
      Eigen::VectorXd rn(m);
      for (int l = 0; l < m; ++l) rn(l) = edge_vector(fn, l).squaredNorm() - dsq(l);
      if (rn.squaredNorm() < r.squaredNorm()) {
        x = xn;
        lambda = std::max(lambda * 0.5, 1e-12);
      } else {
        lambda *= 4.0;
        if (lambda > 1e12) break;
      }
    }
    Framework f = from_state(g, x);
    bool ok = true;
    for (int l = 0; l < m; ++l) {
      if (std::abs(edge_vector(f, l).norm() - d(l)) > 1e-8 * std::max(d(l), 1e-12)) {
        ok = false;
        break;
      }
    }
    if (ok) return f;
  }
  return std::nullopt;
}

struct BranchSweep {
  std::vector<Framework> frameworks;  // one per realizable choice vector
  bool any_strict = false;
  bool any_tangent = false;
};

inline BranchSweep sweep_branches(const DirectedGraph& g, const VertexAddPlan& plan,
                                  const Eigen::VectorXd& d) {
  BranchSweep sweep;
  const int k = static_cast<int>(plan.steps.size());
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<int> choices(static_cast<std::size_t>(k));
    for (int bit = 0; bit < k; ++bit)
      choices[static_cast<std::size_t>(bit)] = static_cast<int>(mask >> bit & 1u);
    try {
      sweep.frameworks.push_back(realize_plan(g, plan, d, choices));
      sweep.any_strict = true;
    } catch (const CirclesTangent&) {
      sweep.any_tangent = true;
      sweep.frameworks.push_back(
          realize_plan(g, plan, d, choices, RealizeOptions{.allow_tangent = true}));
    } catch (const CirclesDisjoint&) {
    }
  }
  return sweep;
}

}  // namespace detail

/// Classify a length assignment. Exact for the triangle and the two-cycles
/// shape (their inequality systems) and for any vertex-add-constructible
/// graph (realization over all placement choices); otherwise a multistart
/// numerical attempt with the approximate flag set.
inline FeasibilityResult edge_length_feasible(const DirectedGraph& g,
                                              const Eigen::VectorXd& d) {
  if (d.size() != g.m()) throw InvalidGraph("length count does not match edges");
  for (int l = 0; l < g.m(); ++l)
    if (d(l) < 0.0) throw InfeasibleLengths("edge lengths must be nonnegative");

  using detail::TripleClass;
  const auto combine = [](std::initializer_list<TripleClass> classes) {
    FeasibilityResult r{Feasibility::Interior, false};
    for (TripleClass c : classes) {
      if (c == TripleClass::Violated) return FeasibilityResult{Feasibility::Infeasible, false};
      if (c == TripleClass::Tight) r.cls = Feasibility::Boundary;
    }
    return r;
  };

  if (g.n() == 3 && undirected_edges(g).size() == 3)
    return combine({detail::classify_triangle(d(0), d(1), d(2))});

  if (const auto shape = match_two_cycles(g)) {
    const auto tri = [&](const std::array<int, 3>& t) {
      return detail::classify_triangle(d(t[0]), d(t[1]), d(t[2]));
    };
    return combine({tri(shape->triangle_lo), tri(shape->triangle_hi)});
  }

  bool laman = false;
  try {
    laman = laman_check(g);
  } catch (const InvalidGraph&) {
    laman = false;
  }
  if (laman && antiparallel_pair_count(g) == 0) {
    if (const auto plan = plan_vertex_add(g)) {
      for (int l = 0; l < g.m(); ++l)
        if (d(l) == 0.0) return {Feasibility::Boundary, false};
      const detail::BranchSweep sweep = detail::sweep_branches(g, *plan, d);
      if (sweep.any_strict) return {Feasibility::Interior, false};
      if (sweep.any_tangent) return {Feasibility::Boundary, false};
      return {Feasibility::Infeasible, false};
    }
  }

  const auto numeric = detail::realize_numeric(g, d, 0x5eedULL);
  return {numeric ? Feasibility::Interior : Feasibility::Infeasible, true};
}

/// All pairwise non-congruent frameworks (rotation + translation only) with
/// the given lengths, for a vertex-add-constructible graph: every placement
/// choice vector is realized and the results deduplicated in choice order.
inline std::vector<Framework> enumerate_frameworks(const DirectedGraph& g,
                                                   const Eigen::VectorXd& d,
                                                   double tol = -1.0) {
  const auto plan = plan_vertex_add(g);
  if (!plan)
    throw NotVertexAddConstructible("graph has no vertex-add construction order");
  if (d.size() != g.m()) throw InvalidGraph("length count does not match edges");
  for (int l = 0; l < g.m(); ++l)
    if (!(d(l) > 0.0)) throw InfeasibleLengths("edge lengths must be positive");

  const detail::BranchSweep sweep = detail::sweep_branches(g, *plan, d);
  if (sweep.frameworks.empty())
    throw InfeasibleLengths("no placement choice realizes the given lengths");

  std::vector<Framework> reps;
  for (const Framework& f : sweep.frameworks) {
    bool seen = false;
    for (const Framework& r : reps) {
      if (are_congruent(f, r, false, tol)) {
        seen = true;
        break;
      }
    }
    if (!seen) reps.push_back(f);
  }
  return reps;
}

/// Reflect the listed vertices across the line through the endpoints of
/// axis_edge; everything else stays put.
inline Framework reflect_vertices(const Framework& f, int axis_edge,
                                  const std::vector<int>& vertex_subset) {
  if (axis_edge < 0 || axis_edge >= f.m()) throw InvalidGraph("axis edge out of range");
  const Edge& e = f.graph().edge(axis_edge);
  const Eigen::Vector2d p = f.position(e.src);
  const Eigen::Vector2d q = f.position(e.tgt);
  const double len = (q - p).norm();
  const double scale = std::max({1.0, p.norm(), q.norm()});
  if (len <= 1e-12 * scale)
    throw DegenerateAxis("axis edge endpoints coincide");
  const Eigen::Vector2d dir = (q - p) / len;
  const Eigen::Vector2d normal(-dir.y(), dir.x());

  Framework out = f;
  for (int v : vertex_subset) {
    const Eigen::Vector2d x = f.position(v);
    out.set_position(v, x - 2.0 * (x - p).dot(normal) * normal);
  }
  return out;
}

/// The four-element reflection orbit {f, R1 f, R2 f, R1 R2 f} of a
/// two-cycles framework: R1 reflects the lower wing vertex across the axis
/// edge, R2 the upper. All members share the same edge lengths.
inline std::array<Framework, 4> symmetry_orbit(const Framework& f) {
  const auto shape = match_two_cycles(f.graph());
  if (!shape) throw GraphMismatch("symmetry orbit requires the two-cycles graph");
  const Framework r1 = reflect_vertices(f, shape->axis_edge, {shape->wing_lo});
  const Framework r2 = reflect_vertices(f, shape->axis_edge, {shape->wing_hi});
  const Framework r12 = reflect_vertices(r2, shape->axis_edge, {shape->wing_lo});
  return {f, r1, r2, r12};
}

/// Lower bound 2^ceil((n-1)/2) on the number of non-congruent frameworks
/// sharing a generic feasible length vector (when the length set has no
/// holes). For integer n, ceil((n-1)/2) == n/2.
inline int ls_lower_bound(int n) {
  if (n < 3) throw InvalidGraph("bound defined for n >= 3");
  return 1 << (n / 2);
}

/// Lusternik-Schnirelmann category of the complex projective space of
/// complex dimension k.
inline int cat_cp(int k) {
  if (k < 0) throw InvalidGraph("dimension must be nonnegative");
  return k + 1;
}

}  // namespace rigidkit
