#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/graph.hpp"

namespace rigidkit {

/// A planar embedding of a directed graph: one point per vertex.
class Framework {
 public:
  Framework(DirectedGraph graph, std::vector<Eigen::Vector2d> positions)
      : graph_(std::move(graph)), positions_(std::move(positions)) {
    if (static_cast<int>(positions_.size()) != graph_.n())
      throw InvalidGraph("position count does not match vertex count");
  }

  const DirectedGraph& graph() const { return graph_; }
  const std::vector<Eigen::Vector2d>& positions() const { return positions_; }
  const Eigen::Vector2d& position(int v) const {
    return positions_[static_cast<std::size_t>(v)];
  }
  void set_position(int v, const Eigen::Vector2d& p) {
    positions_[static_cast<std::size_t>(v)] = p;
  }
  int n() const { return graph_.n(); }
  int m() const { return graph_.m(); }

 private:
  DirectedGraph graph_;
  std::vector<Eigen::Vector2d> positions_;
};

/// Edge displacement z_l = x_target - x_source.
inline Eigen::Vector2d edge_vector(const Framework& f, int l) {
  const Edge& e = f.graph().edge(l);
  return f.position(e.tgt) - f.position(e.src);
}

/// All edge displacements stacked into a 2m-vector, edge order.
inline Eigen::VectorXd edge_vector_stack(const Framework& f) {
  Eigen::VectorXd z(2 * f.m());
  for (int l = 0; l < f.m(); ++l) z.segment<2>(2 * l) = edge_vector(f, l);
  return z;
}

inline double diameter(const Framework& f) {
  double d = 0.0;
  for (std::size_t i = 0; i < f.positions().size(); ++i)
    for (std::size_t j = i + 1; j < f.positions().size(); ++j)
      d = std::max(d, (f.positions()[i] - f.positions()[j]).norm());
  return d;
}

/// All vertices mapped to (numerically) the same point.
inline bool totally_coincidental(const Framework& f) {
  double scale = 1.0;
  for (const auto& p : f.positions()) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  return diameter(f) <= 1e-12 * scale;
}

/// Positions flattened to a 2n state vector (x1, y1, x2, y2, ...).
inline Eigen::VectorXd to_state(const Framework& f) {
  Eigen::VectorXd x(2 * f.n());
  for (int v = 0; v < f.n(); ++v) x.segment<2>(2 * v) = f.position(v);
  return x;
}

inline Framework from_state(const DirectedGraph& g, const Eigen::VectorXd& x) {
  if (x.size() != 2 * g.n()) throw InvalidGraph("state size does not match graph");
  std::vector<Eigen::Vector2d> pos(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) pos[static_cast<std::size_t>(v)] = x.segment<2>(2 * v);
  return Framework(g, std::move(pos));
}

/// Framework file = graph block plus one `v <idx> <x> <y>` line per vertex.
inline Framework parse_framework(std::istream& in) {
  std::stringstream buffered;
  buffered << in.rdbuf();
  std::stringstream graph_pass(buffered.str());
  DirectedGraph g = parse_graph(graph_pass);

  std::vector<Eigen::Vector2d> pos(static_cast<std::size_t>(g.n()), Eigen::Vector2d::Zero());
  std::vector<bool> have(static_cast<std::size_t>(g.n()), false);
  std::stringstream vertex_pass(buffered.str());
  std::string line;
  int lineno = 0;
  while (std::getline(vertex_pass, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag != "v") continue;
    int idx = 0;
    double x = 0.0, y = 0.0;
    if (!(ls >> idx >> x >> y))
      throw ParseError("line " + std::to_string(lineno) + ": bad vertex line");
    if (idx < 1 || idx > g.n())
      throw ParseError("line " + std::to_string(lineno) + ": vertex index out of range");
    pos[static_cast<std::size_t>(idx - 1)] = {x, y};
    have[static_cast<std::size_t>(idx - 1)] = true;
  }
  for (int v = 0; v < g.n(); ++v)
    if (!have[static_cast<std::size_t>(v)])
      throw ParseError("missing position for vertex " + std::to_string(v + 1));
  return Framework(std::move(g), std::move(pos));
}

inline void write_framework(std::ostream& out, const Framework& f) {
  write_graph(out, f.graph());
  for (int v = 0; v < f.n(); ++v)
    out << "v " << (v + 1) << " " << format_double(f.position(v).x()) << " "
        << format_double(f.position(v).y()) << "\n";
}

}  // namespace rigidkit
