#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/framework.hpp"
#include "rigidkit/graph.hpp"
#include "rigidkit/rigidity.hpp"

namespace rigidkit {

/// Attach a new vertex to two distinct existing vertices.
struct VertexAdd {
  int anchor_i = 0;
  int anchor_j = 0;
  friend bool operator==(const VertexAdd&, const VertexAdd&) = default;
};

/// Remove the edge (i, j), then attach a new vertex to i, j and a third
/// distinct vertex k.
struct EdgeSplit {
  int edge_i = 0;
  int edge_j = 0;
  int third = 0;
  friend bool operator==(const EdgeSplit&, const EdgeSplit&) = default;
};

using HennebergStep = std::variant<VertexAdd, EdgeSplit>;

/// An inductive construction starting from a single edge on two vertices.
/// Step t acts on a graph with 2+t vertices and creates vertex 2+t.
class HennebergSequence {
 public:
  HennebergSequence() = default;

  explicit HennebergSequence(std::vector<HennebergStep> steps)
      : steps_(std::move(steps)) {
    for (std::size_t t = 0; t < steps_.size(); ++t) {
      const int existing = 2 + static_cast<int>(t);
      if (const auto* va = std::get_if<VertexAdd>(&steps_[t])) {
        if (va->anchor_i == va->anchor_j)
          throw InvalidStep(static_cast<int>(t), "vertex-add anchors must be distinct");
        if (va->anchor_i < 0 || va->anchor_i >= existing || va->anchor_j < 0 ||
            va->anchor_j >= existing)
          throw InvalidStep(static_cast<int>(t), "vertex-add anchor out of range");
      } else {
        const auto& es = std::get<EdgeSplit>(steps_[t]);
        if (es.edge_i == es.edge_j || es.third == es.edge_i || es.third == es.edge_j)
          throw InvalidStep(static_cast<int>(t), "edge-split vertices must be distinct");
        if (es.edge_i < 0 || es.edge_i >= existing || es.edge_j < 0 ||
            es.edge_j >= existing || es.third < 0 || es.third >= existing)
          throw InvalidStep(static_cast<int>(t), "edge-split vertex out of range");
      }
    }
  }

  const std::vector<HennebergStep>& steps() const { return steps_; }
  int step_count() const { return static_cast<int>(steps_.size()); }

  bool vertex_add_only() const {
    return std::all_of(steps_.begin(), steps_.end(), [](const HennebergStep& s) {
      return std::holds_alternative<VertexAdd>(s);
    });
  }

 private:
  std::vector<HennebergStep> steps_;
};

/// Run the construction. New edges point from the new vertex to its anchors,
/// so every added agent follows the agents it is attached to and ends with
/// outvalence 2 (3 for an edge split).
inline DirectedGraph apply_sequence(const HennebergSequence& seq) {
  int n = 2;
  std::vector<Edge> edges{{0, 1}};
  for (std::size_t t = 0; t < seq.steps().size(); ++t) {
    const int fresh = n;
    if (const auto* va = std::get_if<VertexAdd>(&seq.steps()[t])) {
      edges.push_back({fresh, va->anchor_i});
      edges.push_back({fresh, va->anchor_j});
    } else {
      const auto& es = std::get<EdgeSplit>(seq.steps()[t]);
      const auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) {
        return (e.src == es.edge_i && e.tgt == es.edge_j) ||
               (e.src == es.edge_j && e.tgt == es.edge_i);
      });
      if (it == edges.end())
        throw InvalidStep(static_cast<int>(t), "split edge does not exist");
      edges.erase(it);
      edges.push_back({fresh, es.edge_i});
      edges.push_back({fresh, es.edge_j});
      edges.push_back({fresh, es.third});
    }
    ++n;
  }
  return DirectedGraph(n, std::move(edges));
}

/// True iff every prefix of the construction is minimally rigid.
inline bool validate(const HennebergSequence& seq) {
  try {
    for (int t = 0; t <= seq.step_count(); ++t) {
      std::vector<HennebergStep> prefix(seq.steps().begin(), seq.steps().begin() + t);
      const DirectedGraph g = apply_sequence(HennebergSequence(std::move(prefix)));
      if (!laman_check(g)) return false;
    }
  } catch (const InvalidStep&) {
    return false;
  }
  return true;
}

/// Seed-deterministic random construction with n-2 steps. Edge splits are
/// only possible once three vertices exist, and are skipped entirely when
/// vertex_add_only is set.
inline HennebergSequence random_sequence(int n, std::uint64_t seed,
                                         bool vertex_add_only = false) {
  if (n < 3) throw InvalidGraph("random sequence needs n >= 3");
  Rng rng = Rng::derive(seed, 0xfeedULL);
  std::vector<HennebergStep> steps;
  std::vector<Edge> edges{{0, 1}};
  for (int t = 0; t < n - 2; ++t) {
    const int existing = 2 + t;
    const bool can_split = !vertex_add_only && existing >= 3;
    const bool do_split = can_split && rng.uniform() < 0.5;
    const int fresh = existing;
    if (do_split) {
      const int pick = rng.uniform_int(0, static_cast<int>(edges.size()) - 1);
      const Edge split = edges[static_cast<std::size_t>(pick)];
      int third = rng.uniform_int(0, existing - 3);
      // shift the draw past the two excluded endpoints, ascending
      if (third >= std::min(split.src, split.tgt)) ++third;
      if (third >= std::max(split.src, split.tgt)) ++third;
      steps.push_back(EdgeSplit{split.src, split.tgt, third});
      edges.erase(edges.begin() + pick);
      edges.push_back({fresh, split.src});
      edges.push_back({fresh, split.tgt});
      edges.push_back({fresh, third});
    } else {
      const int i = rng.uniform_int(0, existing - 1);
      int j = rng.uniform_int(0, existing - 2);
      if (j >= i) ++j;
      steps.push_back(VertexAdd{i, j});
      edges.push_back({fresh, i});
      edges.push_back({fresh, j});
    }
  }
  return HennebergSequence(std::move(steps));
}

/// One placement step of a vertex-add construction, in the labels of the
/// graph it was derived from.
struct PlanStep {
  int vertex = 0;    // vertex placed here
  int anchor_a = 0;  // already-placed vertices (anchor_a < anchor_b)
  int anchor_b = 0;
  int edge_a = 0;  // graph edge index carrying the vertex--anchor_a length
  int edge_b = 0;
};

/// A vertex-add-only construction order for a specific graph, used to
/// realize frameworks from edge lengths by circle intersection.
struct VertexAddPlan {
  int base_u = 0;  // base_u < base_v
  int base_v = 0;
  int base_edge = 0;
  std::vector<PlanStep> steps;
};

namespace detail {

struct StripState {
  int n;
  std::vector<std::vector<int>> adj;  // undirected adjacency (alive edges only)
  std::vector<char> alive;
  std::vector<std::vector<int>> edge_index;  // (min,max) -> graph edge id, -1 if none
};

inline int degree_of(const StripState& s, int v) {
  int d = 0;
  for (int w : s.adj[static_cast<std::size_t>(v)])
    if (s.alive[static_cast<std::size_t>(w)]) ++d;
  return d;
}

// Peel degree-2 vertices with backtracking; lowest index first keeps the
// result deterministic.
inline bool strip(StripState& s, int alive_count, std::vector<PlanStep>& reversed) {
  if (alive_count == 2) return true;
  for (int v = 0; v < s.n; ++v) {
    if (!s.alive[static_cast<std::size_t>(v)] || degree_of(s, v) != 2) continue;
    int nb[2];
    int found = 0;
    for (int w : s.adj[static_cast<std::size_t>(v)])
      if (s.alive[static_cast<std::size_t>(w)]) nb[found++] = w;
    const int a = std::min(nb[0], nb[1]);
    const int b = std::max(nb[0], nb[1]);
    s.alive[static_cast<std::size_t>(v)] = 0;
    reversed.push_back({v, a, b,
                        s.edge_index[static_cast<std::size_t>(std::min(v, a))]
                                    [static_cast<std::size_t>(std::max(v, a))],
                        s.edge_index[static_cast<std::size_t>(std::min(v, b))]
                                    [static_cast<std::size_t>(std::max(v, b))]});
    if (strip(s, alive_count - 1, reversed)) return true;
    reversed.pop_back();
    s.alive[static_cast<std::size_t>(v)] = 1;
  }
  return false;
}

}  // namespace detail

/// Find a vertex-add-only construction order for g by peeling degree-2
/// vertices, or nothing when some intermediate graph has none.
inline std::optional<VertexAddPlan> plan_vertex_add(const DirectedGraph& g) {
  if (!laman_check(g)) throw NotLaman("graph is not minimally rigid");
  if (antiparallel_pair_count(g) > 0)
    throw InvalidGraph("vertex-add planning requires a simple directed graph");
  if (g.n() == 2) return VertexAddPlan{0, 1, 0, {}};

  detail::StripState s;
  s.n = g.n();
  s.adj.assign(static_cast<std::size_t>(g.n()), {});
  s.alive.assign(static_cast<std::size_t>(g.n()), 1);
  s.edge_index.assign(static_cast<std::size_t>(g.n()),
                      std::vector<int>(static_cast<std::size_t>(g.n()), -1));
  for (int l = 0; l < g.m(); ++l) {
    const Edge& e = g.edge(l);
    s.adj[static_cast<std::size_t>(e.src)].push_back(e.tgt);
    s.adj[static_cast<std::size_t>(e.tgt)].push_back(e.src);
    s.edge_index[static_cast<std::size_t>(std::min(e.src, e.tgt))]
                [static_cast<std::size_t>(std::max(e.src, e.tgt))] = l;
  }
  std::vector<PlanStep> reversed;
  if (!detail::strip(s, g.n(), reversed)) return std::nullopt;

  VertexAddPlan plan;
  int u = -1, v = -1;
  for (int w = 0; w < g.n(); ++w) {
    if (!s.alive[static_cast<std::size_t>(w)]) continue;
    (u < 0 ? u : v) = w;
  }
  plan.base_u = u;
  plan.base_v = v;
  plan.base_edge = s.edge_index[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
  plan.steps.assign(reversed.rbegin(), reversed.rend());
  return plan;
}

/// The plan re-expressed as a construction sequence: base vertices become 0
/// and 1, placed vertices follow in plan order.
inline std::optional<HennebergSequence> find_vertex_add_order(const DirectedGraph& g) {
  const auto plan = plan_vertex_add(g);
  if (!plan) return std::nullopt;
  std::vector<int> relabel(static_cast<std::size_t>(g.n()), -1);
  relabel[static_cast<std::size_t>(plan->base_u)] = 0;
  relabel[static_cast<std::size_t>(plan->base_v)] = 1;
  std::vector<HennebergStep> steps;
  int next = 2;
  for (const PlanStep& st : plan->steps) {
    steps.push_back(VertexAdd{relabel[static_cast<std::size_t>(st.anchor_a)],
                              relabel[static_cast<std::size_t>(st.anchor_b)]});
    relabel[static_cast<std::size_t>(st.vertex)] = next++;
  }
  return HennebergSequence(std::move(steps));
}

struct CircleIntersection {
  enum class Kind { Two, Tangent, Disjoint } kind = Kind::Disjoint;
  Eigen::Vector2d positive = Eigen::Vector2d::Zero();  // ccw side of p1->p2
  Eigen::Vector2d negative = Eigen::Vector2d::Zero();
};

/// Intersection of circles (p1, r1) and (p2, r2). A gap within
/// 1e-9 * (r1 + r2) of zero counts as tangent, so boundary cases are
/// reported instead of silently resolved.
inline CircleIntersection intersect_circles(const Eigen::Vector2d& p1, double r1,
                                            const Eigen::Vector2d& p2, double r2) {
  CircleIntersection out;
  const double tol = 1e-9 * (r1 + r2);
  const double dist = (p2 - p1).norm();
  if (dist <= tol) {
    // coincident centers: either no solution or a full circle of them
    out.kind = std::abs(r1 - r2) <= tol ? CircleIntersection::Kind::Tangent
                                        : CircleIntersection::Kind::Disjoint;
    out.positive = out.negative = p1 + Eigen::Vector2d(r1, 0.0);
    return out;
  }
  const double outer_gap = dist - (r1 + r2);
  const double inner_gap = std::abs(r1 - r2) - dist;
  if (outer_gap > tol || inner_gap > tol) {
    out.kind = CircleIntersection::Kind::Disjoint;
    return out;
  }
  const Eigen::Vector2d u = (p2 - p1) / dist;
  const Eigen::Vector2d up(-u.y(), u.x());
  const double a = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist);
  const double h2 = r1 * r1 - a * a;
  const double h = h2 > 0.0 ? std::sqrt(h2) : 0.0;
  if (std::abs(outer_gap) <= tol || std::abs(inner_gap) <= tol) {
    out.kind = CircleIntersection::Kind::Tangent;
    out.positive = out.negative = p1 + a * u;
    return out;
  }
  out.kind = CircleIntersection::Kind::Two;
  out.positive = p1 + a * u + h * up;
  out.negative = p1 + a * u - h * up;
  return out;
}

struct RealizeOptions {
  /// Accept tangent steps (both placements coincide) instead of throwing.
  bool allow_tangent = false;
};

/// Place the base edge on the positive x-axis, then intersect circles step
/// by step. choices[k] = 0 picks the positive-signed-area side of the
/// directed anchor segment anchor_a -> anchor_b, 1 the other side.
inline Framework realize_plan(const DirectedGraph& g, const VertexAddPlan& plan,
                              const Eigen::VectorXd& lengths,
                              const std::vector<int>& choices,
                              const RealizeOptions& opts = {}) {
  if (lengths.size() != g.m()) throw InvalidGraph("length count does not match edges");
  for (int l = 0; l < g.m(); ++l)
    if (!(lengths(l) > 0.0)) throw InfeasibleLengths("edge lengths must be positive");
  if (choices.size() != plan.steps.size())
    throw InvalidGraph("choice vector length does not match construction steps");

  std::vector<Eigen::Vector2d> pos(static_cast<std::size_t>(g.n()),
                                   Eigen::Vector2d::Zero());
  pos[static_cast<std::size_t>(plan.base_u)] = {0.0, 0.0};
  pos[static_cast<std::size_t>(plan.base_v)] = {lengths(plan.base_edge), 0.0};
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const PlanStep& st = plan.steps[k];
    const CircleIntersection ci =
        intersect_circles(pos[static_cast<std::size_t>(st.anchor_a)], lengths(st.edge_a),
                          pos[static_cast<std::size_t>(st.anchor_b)], lengths(st.edge_b));
    if (ci.kind == CircleIntersection::Kind::Disjoint)
      throw CirclesDisjoint(static_cast<int>(k));
    if (ci.kind == CircleIntersection::Kind::Tangent && !opts.allow_tangent)
      throw CirclesTangent(static_cast<int>(k));
    pos[static_cast<std::size_t>(st.vertex)] =
        choices[k] == 0 ? ci.positive : ci.negative;
  }
  return Framework(g, std::move(pos));
}

/// Realize a vertex-add-only sequence directly: lengths are indexed in the
/// edge order of apply_sequence(seq).
inline Framework realize(const HennebergSequence& seq, const Eigen::VectorXd& lengths,
                         const std::vector<int>& choices,
                         const RealizeOptions& opts = {}) {
  if (!seq.vertex_add_only())
    throw NotVertexAddConstructible("realization requires a vertex-add-only sequence");
  const DirectedGraph g = apply_sequence(seq);
  VertexAddPlan plan;
  plan.base_u = 0;
  plan.base_v = 1;
  plan.base_edge = 0;
  for (int t = 0; t < seq.step_count(); ++t) {
    const auto& va = std::get<VertexAdd>(seq.steps()[static_cast<std::size_t>(t)]);
    PlanStep st;
    st.vertex = 2 + t;
    st.anchor_a = std::min(va.anchor_i, va.anchor_j);
    st.anchor_b = std::max(va.anchor_i, va.anchor_j);
    // apply_sequence appends (new -> anchor_i) then (new -> anchor_j)
    st.edge_a = 1 + 2 * t + (st.anchor_a == va.anchor_i ? 0 : 1);
    st.edge_b = 1 + 2 * t + (st.anchor_a == va.anchor_i ? 1 : 0);
    plan.steps.push_back(st);
  }
  return realize_plan(g, plan, lengths, choices, opts);
}

/// Sequence file: one `va <i> <j>` or `es <i> <j> <k>` line per step,
/// 1-based vertex labels.
inline HennebergSequence parse_sequence(std::istream& in) {
  std::vector<HennebergStep> steps;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "va") {
      int i = 0, j = 0;
      if (!(ls >> i >> j))
        throw ParseError("line " + std::to_string(lineno) + ": bad vertex-add");
      steps.push_back(VertexAdd{i - 1, j - 1});
    } else if (tag == "es") {
      int i = 0, j = 0, k = 0;
      if (!(ls >> i >> j >> k))
        throw ParseError("line " + std::to_string(lineno) + ": bad edge-split");
      steps.push_back(EdgeSplit{i - 1, j - 1, k - 1});
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown tag '" + tag + "'");
    }
  }
  try {
    return HennebergSequence(std::move(steps));
  } catch (const InvalidStep& err) {
    throw ParseError(err.what());
  }
}

inline void write_sequence(std::ostream& out, const HennebergSequence& seq) {
  for (const HennebergStep& s : seq.steps()) {
    if (const auto* va = std::get_if<VertexAdd>(&s))
      out << "va " << (va->anchor_i + 1) << " " << (va->anchor_j + 1) << "\n";
    else {
      const auto& es = std::get<EdgeSplit>(s);
      out << "es " << (es.edge_i + 1) << " " << (es.edge_j + 1) << " " << (es.third + 1)
          << "\n";
    }
  }
}

}  // namespace rigidkit
