#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/framework.hpp"
#include "rigidkit/graph.hpp"
#include "rigidkit/linalg.hpp"
#include "rigidkit/pebble.hpp"

namespace rigidkit {

/// Half squared edge lengths, in edge order.
inline Eigen::VectorXd distance_function(const Framework& f) {
  Eigen::VectorXd d(f.m());
  for (int l = 0; l < f.m(); ++l) d(l) = 0.5 * edge_vector(f, l).squaredNorm();
  return d;
}

/// m x 2n Jacobian of the distance function. Row l for edge (i, j) carries
/// (x_i - x_j) in vertex i's column block and (x_j - x_i) in vertex j's.
/// Equals Z * (A_m (x) I2) exactly, with Z the block-diagonal matrix of edge
/// displacement rows -- kept as a unit-test identity.
inline Eigen::MatrixXd rigidity_matrix(const Framework& f) {
  const int n = f.n();
  const int m = f.m();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, 2 * n);
  for (int l = 0; l < m; ++l) {
    const Edge& e = f.graph().edge(l);
    const Eigen::Vector2d z = edge_vector(f, l);
    r.block<1, 2>(l, 2 * e.src) = -z.transpose();
    r.block<1, 2>(l, 2 * e.tgt) = z.transpose();
  }
  return r;
}

/// First-order flexes only come from rigid motions: rank of the rigidity
/// matrix is 2n-3. Rank counts singular values above tol * sigma_max.
inline bool is_infinitesimally_rigid(const Framework& f, double tol = 1e-9) {
  if (f.n() < 2) throw DegenerateFramework("need at least two vertices");
  if (totally_coincidental(f))
    throw DegenerateFramework("all vertices coincide");
  return numeric_rank(rigidity_matrix(f), tol) == 2 * f.n() - 3;
}

namespace detail {

inline Framework random_framework(const DirectedGraph& g, Rng& rng) {
  std::vector<Eigen::Vector2d> pos;
  pos.reserve(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    pos.push_back({x, y});
  }
  return Framework(g, std::move(pos));
}

}  // namespace detail

/// Maximum rigidity-matrix rank over `samples` random placements with
/// coordinates in [0,1). Stands in for the rank at an algebraically generic
/// placement: a random placement is rank-deficient with probability zero.
inline int generic_rank(const DirectedGraph& g, int samples = 5,
                        std::uint64_t seed = 0) {
  int best = 0;
  for (int s = 0; s < samples; ++s) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(s));
    const Framework f = detail::random_framework(g, rng);
    best = std::max(best, numeric_rank(rigidity_matrix(f)));
  }
  return best;
}

namespace detail {

/// Exhaustive check of the count condition on every vertex subset. Only for
/// small n; serves as the independent oracle for the pebble game.
inline bool exhaustive_laman(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 2) return false;
  if (static_cast<int>(edges.size()) != 2 * n - 3) return false;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int nprime = __builtin_popcount(mask);
    if (nprime < 2) continue;
    int mprime = 0;
    for (const auto& [a, b] : edges)
      if ((mask >> a & 1u) && (mask >> b & 1u)) ++mprime;
    if (mprime > 2 * nprime - 3) return false;
  }
  return true;
}

}  // namespace detail

/// Minimal rigidity of the underlying undirected simple graph: 2n-3 edges
/// and no over-braced subgraph. The pebble game is the production path; for
/// n <= 8 the exhaustive subgraph check runs too and the two must agree.
inline bool laman_check(const DirectedGraph& g) {
  if (g.n() < 2) throw InvalidGraph("laman check needs n >= 2");
  const auto edges = undirected_edges(g);
  const bool pebble = detail::pebble_game_laman(g.n(), edges);
  if (g.n() <= 8) {
    const bool exhaustive = detail::exhaustive_laman(g.n(), edges);
    if (pebble != exhaustive)
      throw Inconsistency("pebble game and exhaustive subgraph check disagree");
  }
  return pebble;
}

/// Generically rigid after deleting any single (undirected) edge.
inline bool is_redundantly_rigid(const DirectedGraph& g, std::uint64_t seed = 0) {
  if (g.n() < 3) throw InvalidGraph("redundant rigidity needs n >= 3");
  const auto undirected = undirected_edges(g);
  const int target = 2 * g.n() - 3;
  for (std::size_t skip = 0; skip < undirected.size(); ++skip) {
    std::vector<Edge> edges;
    for (std::size_t l = 0; l < undirected.size(); ++l)
      if (l != skip) edges.push_back({undirected[l].first, undirected[l].second});
    const DirectedGraph reduced(g.n(), std::move(edges));
    if (generic_rank(reduced, 5, splitmix64(seed) + skip) != target) return false;
  }
  return true;
}

namespace detail {

inline bool connected_after_removal(int n, const std::vector<std::vector<int>>& adj,
                                    unsigned removed_mask) {
  int start = -1;
  int alive = 0;
  for (int v = 0; v < n; ++v) {
    if (removed_mask >> v & 1u) continue;
    ++alive;
    if (start < 0) start = v;
  }
  if (alive <= 1) return true;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if ((removed_mask >> w & 1u) || seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = true;
      ++reached;
      stack.push_back(w);
    }
  }
  return reached == alive;
}

}  // namespace detail

/// Largest k such that removing any k-1 vertices leaves the graph connected
/// (undirected sense). Exhaustive over all removal subsets; refuses n > 12.
inline int vertex_connectivity(const DirectedGraph& g) {
  if (g.n() < 2) throw InvalidGraph("connectivity needs n >= 2");
  if (g.n() > 12)
    throw TooLarge("exhaustive vertex connectivity is limited to n <= 12");
  const int n = g.n();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [a, b] : undirected_edges(g)) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  if (!detail::connected_after_removal(n, adj, 0u)) return 0;
  for (int cut = 1; cut <= n - 2; ++cut) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) != cut) continue;
      if (!detail::connected_after_removal(n, adj, mask)) return cut;
    }
  }
  return n - 1;
}

/// Edge lengths at a generic placement pin the framework down to rigid
/// motion and reflection: redundantly rigid and 3-connected (n >= 4); the
/// triangle is the n = 3 special case.
inline bool is_generically_globally_rigid(const DirectedGraph& g,
                                          std::uint64_t seed = 0) {
  if (g.n() < 3) throw InvalidGraph("global rigidity needs n >= 3");
  if (g.n() == 3) return undirected_edges(g).size() == 3;
  return is_redundantly_rigid(g, seed) && vertex_connectivity(g) >= 3;
}

/// For a leaderless graph, the n x m selector K with K(source(l), l) = 1.
/// Satisfies edge_adjacency = mixed_adjacency * K exactly and has rank n.
inline Eigen::MatrixXi edge_source_selector(const DirectedGraph& g) {
  for (int v = 0; v < g.n(); ++v)
    if (outvalence(g, v) == 0)
      throw NotLeaderless("vertex " + std::to_string(v + 1) + " has no out-edge");
  Eigen::MatrixXi k = Eigen::MatrixXi::Zero(g.n(), g.m());
  for (int l = 0; l < g.m(); ++l) k(g.edge(l).src, l) = 1;
  return k;
}

struct RigidityReport {
  int n = 0;
  int m = 0;
  int antiparallel_collapsed = 0;
  int rank = 0;
  bool is_infinitesimally_rigid = false;  // at generic placements
  bool is_laman = false;
  bool is_minimally_rigid = false;
  bool is_redundantly_rigid = false;
  int vertex_connectivity = 0;
  bool is_generically_globally_rigid = false;
  Eigen::VectorXd singular_values;  // of the best-rank random placement
};

/// Full ladder of graph-level rigidity decisions. Minimal rigidity is
/// decided by rank + edge count, independently of the combinatorial route,
/// so the two can be cross-checked.
inline RigidityReport analyze_graph(const DirectedGraph& g, std::uint64_t seed = 0,
                                    int samples = 5) {
  RigidityReport rep;
  rep.n = g.n();
  rep.m = g.m();
  rep.antiparallel_collapsed = antiparallel_pair_count(g);

  int best_rank = -1;
  for (int s = 0; s < samples; ++s) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(s));
    const Framework f = detail::random_framework(g, rng);
    const Eigen::MatrixXd r = rigidity_matrix(f);
    const int rank = numeric_rank(r);
    if (rank > best_rank) {
      best_rank = rank;
      rep.singular_values = singular_values(r);
    }
  }
  rep.rank = std::max(best_rank, 0);
  rep.is_infinitesimally_rigid = g.n() >= 2 && rep.rank == 2 * g.n() - 3;
  rep.is_laman = g.n() >= 2 && laman_check(g);
  const int undirected_m = static_cast<int>(undirected_edges(g).size());
  rep.is_minimally_rigid =
      rep.is_infinitesimally_rigid && undirected_m == 2 * g.n() - 3;
  rep.is_redundantly_rigid = g.n() >= 3 && is_redundantly_rigid(g, seed);
  rep.vertex_connectivity = vertex_connectivity(g);
  rep.is_generically_globally_rigid =
      g.n() >= 3 && is_generically_globally_rigid(g, seed);
  return rep;
}

inline void write_report(std::ostream& out, const RigidityReport& r) {
  out << "n = " << r.n << "\n";
  out << "m = " << r.m << "\n";
  if (r.antiparallel_collapsed > 0)
    out << "antiparallel_collapsed = " << r.antiparallel_collapsed << "\n";
  out << "rank = " << r.rank << "\n";
  out << "is_infinitesimally_rigid = " << format_bool(r.is_infinitesimally_rigid) << "\n";
  out << "is_laman = " << format_bool(r.is_laman) << "\n";
  out << "is_minimally_rigid = " << format_bool(r.is_minimally_rigid) << "\n";
  out << "is_redundantly_rigid = " << format_bool(r.is_redundantly_rigid) << "\n";
  out << "vertex_connectivity = " << r.vertex_connectivity << "\n";
  out << "is_generically_globally_rigid = "
      << format_bool(r.is_generically_globally_rigid) << "\n";
  out << "singular_values =";
  for (int i = 0; i < r.singular_values.size(); ++i)
    out << " " << format_double(r.singular_values(i));
  out << "\n";
}

}  // namespace rigidkit
