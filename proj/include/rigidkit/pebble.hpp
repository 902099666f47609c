#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace rigidkit::detail {

// (2,3)-pebble game on an undirected simple graph (Lee-Streinu). Edges are
// inserted one at a time; an edge can be inserted iff 4 pebbles can be
// gathered on its endpoints, which certifies that every subgraph containing
// it stays at or below the 2n'-3 edge budget.
class PebbleGame {
 public:
  explicit PebbleGame(int n) : pebbles_(n, 2), out_(n), visited_(n, false) {}

  /// Try to insert edge (u, v). Returns false iff the edge is dependent,
  /// i.e. it would overconstrain some subgraph.
  bool insert(int u, int v) {
    while (pebbles_[u] + pebbles_[v] < 4) {
      if (!pull_pebble(u, v) && !pull_pebble(v, u)) return false;
    }
    --pebbles_[u];
    out_[u].push_back(v);
    return true;
  }

 private:
  // Search for a free pebble reachable from `root` along the current edge
  // orientation, never through `blocked`. On success the pebble is moved to
  // `root`, reversing every edge on the path.
  bool pull_pebble(int root, int blocked) {
    std::fill(visited_.begin(), visited_.end(), false);
    visited_[root] = true;
    visited_[blocked] = true;
    return dfs(root);
  }

  bool dfs(int v) {
    for (std::size_t i = 0; i < out_[v].size(); ++i) {
      const int w = out_[v][i];
      if (visited_[w]) continue;
      visited_[w] = true;
      if (pebbles_[w] > 0 || dfs(w)) {
        --pebbles_[w];
        ++pebbles_[v];
        out_[v].erase(out_[v].begin() + static_cast<std::ptrdiff_t>(i));
        out_[w].push_back(v);
        return true;
      }
    }
    return false;
  }

  std::vector<int> pebbles_;
  std::vector<std::vector<int>> out_;
  std::vector<bool> visited_;
};

/// True iff the undirected simple graph is (2,3)-sparse with every edge
/// independent (no subgraph exceeds 2n'-3 edges).
inline bool pebble_game_independent(int n,
                                    const std::vector<std::pair<int, int>>& edges) {
  PebbleGame game(n);
  for (const auto& [u, v] : edges)
    if (!game.insert(u, v)) return false;
  return true;
}

/// Minimal rigidity by count + independence: exactly 2n-3 edges, all of them
/// independent in the (2,3)-pebble game.
inline bool pebble_game_laman(int n,
                              const std::vector<std::pair<int, int>>& edges) {
  if (n < 2) return false;
  if (static_cast<int>(edges.size()) != 2 * n - 3) return false;
  return pebble_game_independent(n, edges);
}

}  // namespace rigidkit::detail
