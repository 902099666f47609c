#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "rigidkit/framework.hpp"

namespace rigidkit {

/// Static picture of a framework: labeled vertices, directed edges with
/// arrowheads. Output is fully determined by the framework.
inline void write_framework_svg(std::ostream& out, const Framework& f) {
  double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
  if (f.n() > 0) {
    min_x = max_x = f.position(0).x();
    min_y = max_y = f.position(0).y();
    for (const auto& p : f.positions()) {
      min_x = std::min(min_x, p.x());
      max_x = std::max(max_x, p.x());
      min_y = std::min(min_y, p.y());
      max_y = std::max(max_y, p.y());
    }
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-6});
  const double margin = 0.15 * span;
  const double unit = 400.0 / (span + 2.0 * margin);
  const auto px = [&](double x) { return (x - min_x + margin) * unit; };
  // SVG y grows downward; flip so the picture matches plane coordinates
  const auto py = [&](double y) { return (max_y - y + margin) * unit; };
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };

  const double size = 400.0 + 2.0 * margin * unit;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size)
      << "\" height=\"" << num(size) << "\">\n";
  out << "<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" "
         "refX=\"7\" refY=\"3\" orient=\"auto\"><path d=\"M0,0 L7,3 L0,6 z\" "
         "fill=\"#555\"/></marker></defs>\n";
  for (int l = 0; l < f.m(); ++l) {
    const Edge& e = f.graph().edge(l);
    const Eigen::Vector2d a = f.position(e.src);
    const Eigen::Vector2d b = f.position(e.tgt);
    // stop the arrow a little short of the target vertex circle
    const Eigen::Vector2d dir = (b - a).norm() > 0 ? (b - a).normalized() : Eigen::Vector2d(0, 0);
    const Eigen::Vector2d tip = b - dir * (8.0 / unit);
    out << "<line x1=\"" << num(px(a.x())) << "\" y1=\"" << num(py(a.y()))
        << "\" x2=\"" << num(px(tip.x())) << "\" y2=\"" << num(py(tip.y()))
        << "\" stroke=\"#555\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\"/>\n";
  }
  for (int v = 0; v < f.n(); ++v) {
    const Eigen::Vector2d p = f.position(v);
    out << "<circle cx=\"" << num(px(p.x())) << "\" cy=\"" << num(py(p.y()))
        << "\" r=\"5\" fill=\"#1f77b4\"/>\n";
    out << "<text x=\"" << num(px(p.x()) + 8.0) << "\" y=\"" << num(py(p.y()) - 8.0)
        << "\" font-size=\"14\" font-family=\"sans-serif\">" << (v + 1) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace rigidkit
