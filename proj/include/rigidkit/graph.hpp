#pragma once

#include <Eigen/Dense>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/pebble.hpp"

namespace rigidkit {

/// Directed edge between vertex indices (0-based internally; all file and
/// report I/O is 1-based).
struct Edge {
  int src = 0;
  int tgt = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// A directed graph with labeled vertices and an *ordered* edge list. The
/// edge order is part of the identity: it fixes the row order of every
/// matrix operator and the component order of every length vector.
class DirectedGraph {
 public:
  DirectedGraph(int vertex_count, std::vector<Edge> edges)
      : n_(vertex_count), edges_(std::move(edges)) {
    if (n_ <= 0) throw InvalidGraph("vertex count must be positive");
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : edges_) {
      if (e.src < 0 || e.src >= n_ || e.tgt < 0 || e.tgt >= n_)
        throw InvalidGraph("edge index out of range");
      if (e.src == e.tgt) throw InvalidGraph("self-loops are not allowed");
      if (!seen.insert({e.src, e.tgt}).second)
        throw InvalidGraph("duplicate directed edge");
    }
  }

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int l) const { return edges_[static_cast<std::size_t>(l)]; }

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  int n_;
  std::vector<Edge> edges_;
};

inline int outvalence(const DirectedGraph& g, int v) {
  int count = 0;
  for (const Edge& e : g.edges())
    if (e.src == v) ++count;
  return count;
}

inline int invalence(const DirectedGraph& g, int v) {
  int count = 0;
  for (const Edge& e : g.edges())
    if (e.tgt == v) ++count;
  return count;
}

/// Edge indices leaving v, in edge order.
inline std::vector<int> out_edges(const DirectedGraph& g, int v) {
  std::vector<int> idx;
  for (int l = 0; l < g.m(); ++l)
    if (g.edge(l).src == v) idx.push_back(l);
  return idx;
}

/// n x n matrix with -1 at (i, j) iff the graph has the edge i -> j.
inline Eigen::MatrixXi adjacency_matrix(const DirectedGraph& g) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(g.n(), g.n());
  for (const Edge& e : g.edges()) a(e.src, e.tgt) = -1;
  return a;
}

/// m x m matrix: entry (i, j) is -1 if edges i and j leave the same vertex
/// (so the diagonal is -1), +1 if edge i ends where edge j starts, else 0.
inline Eigen::MatrixXi edge_adjacency_matrix(const DirectedGraph& g) {
  const int m = g.m();
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (g.edge(i).src == g.edge(j).src)
        a(i, j) = -1;
      else if (g.edge(i).tgt == g.edge(j).src)
        a(i, j) = 1;
    }
  }
  return a;
}

/// m x n matrix: row l has -1 at the source of edge l and +1 at its target.
/// Rows are edges; this orientation is forced by the factorization of the
/// rigidity matrix through it.
inline Eigen::MatrixXi mixed_adjacency_matrix(const DirectedGraph& g) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(g.m(), g.n());
  for (int l = 0; l < g.m(); ++l) {
    a(l, g.edge(l).src) = -1;
    a(l, g.edge(l).tgt) = 1;
  }
  return a;
}

/// Kronecker product with the 2x2 identity: every scalar entry a becomes the
/// block a*I2. Doubles each dimension.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron2(
    const Eigen::MatrixBase<Derived>& m) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out = Mat::Zero(2 * m.rows(), 2 * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(2 * i, 2 * j) = m(i, j);
      out(2 * i + 1, 2 * j + 1) = m(i, j);
    }
  return out;
}

/// Underlying undirected simple edge list: antiparallel pairs collapse to
/// one edge. Order of first occurrence is kept; pairs are (min, max).
inline std::vector<std::pair<int, int>> undirected_edges(const DirectedGraph& g) {
  std::vector<std::pair<int, int>> out;
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : g.edges()) {
    const std::pair<int, int> key{std::min(e.src, e.tgt), std::max(e.src, e.tgt)};
    if (seen.insert(key).second) out.push_back(key);
  }
  return out;
}

/// Number of antiparallel pairs collapsed by undirected_edges().
inline int antiparallel_pair_count(const DirectedGraph& g) {
  return g.m() - static_cast<int>(undirected_edges(g).size());
}

enum class AgentRole { Leader, Coleader, Follower };

inline const char* to_string(AgentRole r) {
  switch (r) {
    case AgentRole::Leader: return "leader";
    case AgentRole::Coleader: return "coleader";
    default: return "follower";
  }
}

struct AgentClassification {
  std::vector<AgentRole> roles;
  bool is_leaderless = false;
  /// Heuristic feasibility notes (e.g. an agent following more than two
  /// others in a graph that has no slack to spare). Advisory only.
  std::vector<std::string> warnings;
};

/// Role of every vertex: leader = follows nobody, follower = follows but is
/// not followed, coleader = both.
inline AgentClassification classify_agents(const DirectedGraph& g) {
  AgentClassification c;
  c.roles.reserve(static_cast<std::size_t>(g.n()));
  bool any_leader = false;
  for (int v = 0; v < g.n(); ++v) {
    const int out = outvalence(g, v);
    const int in = invalence(g, v);
    AgentRole role;
    if (out == 0) {
      role = AgentRole::Leader;
      any_leader = true;
    } else if (in == 0) {
      role = AgentRole::Follower;
    } else {
      role = AgentRole::Coleader;
    }
    c.roles.push_back(role);
  }
  c.is_leaderless = !any_leader;

  for (int v = 0; v < g.n(); ++v) {
    if (outvalence(g, v) <= 2) continue;
    // Following >2 agents is outside the control model; it is also a known
    // trouble sign when the rest of the graph is only just rigid.
    std::vector<std::pair<int, int>> rest;
    for (const auto& [a, b] : undirected_edges(g))
      if (a != v && b != v) rest.push_back({a < v ? a : a - 1, b < v ? b : b - 1});
    const bool rest_minimally_rigid =
        g.n() >= 3 && detail::pebble_game_laman(g.n() - 1, rest);
    std::ostringstream msg;
    msg << "vertex " << (v + 1) << ": outvalence > 2";
    if (rest_minimally_rigid)
      msg << " onto minimally rigid subgraph";
    c.warnings.push_back(msg.str());
  }
  return c;
}

/// Graph file format: `n <count>` then one `e <src> <tgt>` line per edge,
/// 1-based indices, `#` starts a comment.
inline DirectedGraph parse_graph(std::istream& in) {
  int n = -1;
  std::vector<Edge> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "n") {
      if (!(ls >> n)) throw ParseError("line " + std::to_string(lineno) + ": bad vertex count");
    } else if (tag == "e") {
      int s = 0, t = 0;
      if (!(ls >> s >> t)) throw ParseError("line " + std::to_string(lineno) + ": bad edge");
      edges.push_back({s - 1, t - 1});
    } else if (tag == "v") {
      // vertex position line; ignored here, consumed by the framework parser
      continue;
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown tag '" + tag + "'");
    }
  }
  if (n < 0) throw ParseError("missing 'n <count>' line");
  try {
    return DirectedGraph(n, std::move(edges));
  } catch (const InvalidGraph& err) {
    throw ParseError(err.what());
  }
}

inline void write_graph(std::ostream& out, const DirectedGraph& g) {
  out << "n " << g.n() << "\n";
  for (const Edge& e : g.edges()) out << "e " << (e.src + 1) << " " << (e.tgt + 1) << "\n";
}

/// The four-agent double-triangle graph used as the running fixture: edges
/// 1->2, 2->3, 3->1, 4->3, 1->4 in that order.
inline DirectedGraph two_cycles_graph() {
  return DirectedGraph(4, {{0, 1}, {1, 2}, {2, 0}, {3, 2}, {0, 3}});
}

/// Directed 3-cycle 1->2, 2->3, 3->1.
inline DirectedGraph triangle_graph() {
  return DirectedGraph(3, {{0, 1}, {1, 2}, {2, 0}});
}

}  // namespace rigidkit
