#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/framework.hpp"
#include "rigidkit/graph.hpp"

namespace rigidkit {

/// Scalar feedback for an agent following one other agent. Arguments are the
/// squared target length and the squared-length error; the optional partial
/// is with respect to the error.
struct SingleLaw {
  std::function<double(double d, double e)> u;
  std::function<double(double d, double e)> du_de;  // optional analytic partial
};

enum class DualMode { DistanceOnly, DistanceAngle, Symmetric };

/// Feedback pair for an agent following two other agents. Argument order is
/// (d_first, d_second, e_first, e_second, w) where "first" is the agent's
/// first out-edge in edge order and w is the inner product of the two edge
/// displacements. Distance-only laws ignore w. Partials are optional; when
/// absent, central differences are used.
struct DualLaw {
  using Fn = std::function<double(double d1, double d2, double e1, double e2, double w)>;
  DualMode mode = DualMode::DistanceOnly;
  Fn u1;
  Fn u2;
  Fn u1_de1, u1_de2, u1_dw;
  Fn u2_de1, u2_de2, u2_dw;
};

/// An agent that follows nobody holds still.
struct LeaderLaw {};

using ControlLaw = std::variant<LeaderLaw, SingleLaw, DualLaw>;

inline SingleLaw proportional_single(double kappa) {
  SingleLaw law;
  law.u = [kappa](double, double e) { return kappa * e; };
  law.du_de = [kappa](double, double) { return kappa; };
  return law;
}

inline DualLaw proportional_dual(double k1, double k2) {
  DualLaw law;
  law.mode = DualMode::DistanceOnly;
  law.u1 = [k1](double, double, double e1, double, double) { return k1 * e1; };
  law.u2 = [k2](double, double, double, double e2, double) { return k2 * e2; };
  law.u1_de1 = [k1](double, double, double, double, double) { return k1; };
  law.u1_de2 = [](double, double, double, double, double) { return 0.0; };
  law.u1_dw = law.u1_de2;
  law.u2_de1 = law.u1_de2;
  law.u2_de2 = [k2](double, double, double, double, double) { return k2; };
  law.u2_dw = law.u1_de2;
  return law;
}

/// An angle-dependent family that stays compatible: the bounded factor
/// q(w) = w / (1 + w^2) only enters multiplied by both errors, so the law
/// and its w-partial both vanish at zero error.
inline DualLaw angle_aware_dual(double kappa, double beta) {
  const auto q = [](double w) { return w / (1.0 + w * w); };
  const auto qp = [](double w) {
    const double s = 1.0 + w * w;
    return (1.0 - w * w) / (s * s);
  };
  DualLaw law;
  law.mode = DualMode::DistanceAngle;
  law.u1 = [=](double, double, double e1, double e2, double w) {
    return -e1 * (kappa + beta * e2 * q(w));
  };
  law.u2 = [=](double, double, double e1, double e2, double w) {
    return -e2 * (kappa + beta * e1 * q(w));
  };
  law.u1_de1 = [=](double, double, double, double e2, double w) {
    return -(kappa + beta * e2 * q(w));
  };
  law.u1_de2 = [=](double, double, double e1, double, double w) {
    return -e1 * beta * q(w);
  };
  law.u1_dw = [=](double, double, double e1, double e2, double w) {
    return -e1 * beta * e2 * qp(w);
  };
  law.u2_de1 = [=](double, double, double, double e2, double w) {
    return -e2 * beta * q(w);
  };
  law.u2_de2 = [=](double, double, double e1, double, double w) {
    return -(kappa + beta * e1 * q(w));
  };
  law.u2_dw = [=](double, double, double e1, double e2, double w) {
    return -e2 * beta * e1 * qp(w);
  };
  return law;
}

/// Deliberately broken family for exercising the compatibility gate: the
/// first component carries a raw +offset*w term that survives at zero error.
inline DualLaw planted_w_offset_dual(double kappa, double offset = 0.1) {
  DualLaw law;
  law.mode = DualMode::DistanceAngle;
  law.u1 = [=](double, double, double e1, double, double w) { return kappa * e1 + offset * w; };
  law.u2 = [=](double, double, double, double e2, double) { return kappa * e2; };
  law.u1_de1 = [=](double, double, double, double, double) { return kappa; };
  law.u1_de2 = [](double, double, double, double, double) { return 0.0; };
  law.u1_dw = [=](double, double, double, double, double) { return offset; };
  law.u2_de1 = law.u1_de2;
  law.u2_de2 = law.u1_de1;
  law.u2_dw = law.u1_de2;
  return law;
}

/// Build an exchange-symmetric pair from one function u(e_own, e_other, w):
/// swapping the two followed edges leaves the agent's velocity unchanged.
inline DualLaw symmetric_dual(std::function<double(double, double, double)> u) {
  DualLaw law;
  law.mode = DualMode::Symmetric;
  law.u1 = [u](double, double, double e1, double e2, double w) { return u(e1, e2, w); };
  law.u2 = [u](double, double, double e1, double e2, double w) { return u(e2, e1, w); };
  return law;
}

/// A formation task: the information-flow graph, one target length per edge
/// (stored as plain lengths, squared once for the error definition), and one
/// control law per agent matching its outvalence.
class FormationProblem {
 public:
  FormationProblem(DirectedGraph graph, Eigen::VectorXd target_lengths,
                   std::vector<ControlLaw> laws)
      : graph_(std::move(graph)),
        targets_(std::move(target_lengths)),
        laws_(std::move(laws)) {
    if (targets_.size() != graph_.m())
      throw InvalidGraph("target count does not match edge count");
    for (int l = 0; l < graph_.m(); ++l)
      if (!(targets_(l) > 0.0)) throw InvalidGraph("target lengths must be positive");
    if (static_cast<int>(laws_.size()) != graph_.n())
      throw InvalidGraph("need one control law per agent");
    squared_targets_ = targets_.array().square();
    out_edges_.reserve(static_cast<std::size_t>(graph_.n()));
    for (int v = 0; v < graph_.n(); ++v) {
      auto out = out_edges(graph_, v);
      if (out.size() > 2)
        throw InvalidGraph("agent " + std::to_string(v + 1) +
                           " follows more than two agents; the model stops at two");
      const ControlLaw& law = laws_[static_cast<std::size_t>(v)];
      const bool ok = (out.empty() && std::holds_alternative<LeaderLaw>(law)) ||
                      (out.size() == 1 && std::holds_alternative<SingleLaw>(law)) ||
                      (out.size() == 2 && std::holds_alternative<DualLaw>(law));
      if (!ok)
        throw InvalidGraph("law variant of agent " + std::to_string(v + 1) +
                           " does not match its outvalence");
      out_edges_.push_back(std::move(out));
    }
    edge_adjacency2_ = kron2(edge_adjacency_matrix(graph_)).cast<double>();
  }

  const DirectedGraph& graph() const { return graph_; }
  const Eigen::VectorXd& target_lengths() const { return targets_; }
  const Eigen::VectorXd& squared_targets() const { return squared_targets_; }
  const std::vector<ControlLaw>& laws() const { return laws_; }
  const std::vector<int>& agent_out_edges(int v) const {
    return out_edges_[static_cast<std::size_t>(v)];
  }
  const Eigen::MatrixXd& edge_adjacency2() const { return edge_adjacency2_; }

 private:
  DirectedGraph graph_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd squared_targets_;
  std::vector<ControlLaw> laws_;
  std::vector<std::vector<int>> out_edges_;
  Eigen::MatrixXd edge_adjacency2_;
};

enum class LawFamily { Proportional, AngleAware, PlantedWOffset };

struct LawParams {
  double kappa = 1.0;
  double beta = 0.5;
  double offset = 0.1;
};

/// One law per agent, picked by outvalence. Agents with a single target
/// always get the proportional law; the dual families differ.
inline std::vector<ControlLaw> build_laws(const DirectedGraph& g, LawFamily family,
                                          const LawParams& p = {}) {
  std::vector<ControlLaw> laws;
  laws.reserve(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) {
    const int out = outvalence(g, v);
    if (out == 0) {
      laws.emplace_back(LeaderLaw{});
    } else if (out == 1) {
      laws.emplace_back(proportional_single(p.kappa));
    } else {
      switch (family) {
        case LawFamily::Proportional:
          laws.emplace_back(proportional_dual(p.kappa, p.kappa));
          break;
        case LawFamily::AngleAware:
          laws.emplace_back(angle_aware_dual(p.kappa, p.beta));
          break;
        case LawFamily::PlantedWOffset:
          laws.emplace_back(planted_w_offset_dual(p.kappa, p.offset));
          break;
      }
    }
  }
  return laws;
}

/// Squared-length errors e_l = |x_i - x_j|^2 - d_l^2, edge order.
inline Eigen::VectorXd error_vector(const FormationProblem& p, const Eigen::VectorXd& x) {
  Eigen::VectorXd e(p.graph().m());
  for (int l = 0; l < p.graph().m(); ++l) {
    const Edge& ed = p.graph().edge(l);
    const Eigen::Vector2d z = x.segment<2>(2 * ed.tgt) - x.segment<2>(2 * ed.src);
    e(l) = z.squaredNorm() - p.squared_targets()(l);
  }
  return e;
}

inline Eigen::VectorXd error_vector(const FormationProblem& p, const Framework& f) {
  return error_vector(p, to_state(f));
}

/// Velocity of every agent under its own law, as a 2n vector. Leaders are
/// stationary; a dual agent weighs its two edge displacements by u1 and u2.
inline Eigen::VectorXd vector_field_x(const FormationProblem& p, const Eigen::VectorXd& x) {
  if (x.size() != 2 * p.graph().n()) throw InvalidGraph("state size mismatch");
  if (!x.allFinite()) throw NonFiniteState("state contains NaN or infinity");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < p.graph().n(); ++i) {
    const auto& out = p.agent_out_edges(i);
    if (out.empty()) continue;
    if (out.size() == 1) {
      const int l = out[0];
      const Edge& ed = p.graph().edge(l);
      const Eigen::Vector2d z = x.segment<2>(2 * ed.tgt) - x.segment<2>(2 * ed.src);
      const double e = z.squaredNorm() - p.squared_targets()(l);
      const auto& law = std::get<SingleLaw>(p.laws()[static_cast<std::size_t>(i)]);
      v.segment<2>(2 * i) = law.u(p.squared_targets()(l), e) * z;
    } else {
      const int a = out[0];
      const int b = out[1];
      const Eigen::Vector2d za =
          x.segment<2>(2 * p.graph().edge(a).tgt) - x.segment<2>(2 * i);
      const Eigen::Vector2d zb =
          x.segment<2>(2 * p.graph().edge(b).tgt) - x.segment<2>(2 * i);
      const double ea = za.squaredNorm() - p.squared_targets()(a);
      const double eb = zb.squaredNorm() - p.squared_targets()(b);
      const double w = za.dot(zb);
      const double da = p.squared_targets()(a);
      const double db = p.squared_targets()(b);
      const auto& law = std::get<DualLaw>(p.laws()[static_cast<std::size_t>(i)]);
      v.segment<2>(2 * i) = law.u1(da, db, ea, eb, w) * za + law.u2(da, db, ea, eb, w) * zb;
    }
  }
  return v;
}

/// Diagonal gain matrix of the edge-coordinate dynamics: entry l is the law
/// coefficient multiplying z_l in its source agent's velocity.
inline Eigen::VectorXd gain_diagonal(const FormationProblem& p, const Eigen::VectorXd& z) {
  const int m = p.graph().m();
  Eigen::VectorXd diag(m);
  for (int l = 0; l < m; ++l) {
    const int agent = p.graph().edge(l).src;
    const auto& out = p.agent_out_edges(agent);
    if (out.size() == 1) {
      const double e = z.segment<2>(2 * l).squaredNorm() - p.squared_targets()(l);
      const auto& law = std::get<SingleLaw>(p.laws()[static_cast<std::size_t>(agent)]);
      diag(l) = law.u(p.squared_targets()(l), e);
    } else {
      const int a = out[0];
      const int b = out[1];
      const Eigen::Vector2d za = z.segment<2>(2 * a);
      const Eigen::Vector2d zb = z.segment<2>(2 * b);
      const double ea = za.squaredNorm() - p.squared_targets()(a);
      const double eb = zb.squaredNorm() - p.squared_targets()(b);
      const double w = za.dot(zb);
      const double da = p.squared_targets()(a);
      const double db = p.squared_targets()(b);
      const auto& law = std::get<DualLaw>(p.laws()[static_cast<std::size_t>(agent)]);
      diag(l) = (l == a) ? law.u1(da, db, ea, eb, w) : law.u2(da, db, ea, eb, w);
    }
  }
  return diag;
}

/// Edge-coordinate dynamics (A_e (x) I2) * D^(2) * z for an arbitrary
/// 2m-vector z. Agrees with the edge differences of vector_field_x whenever
/// z is assembled from a state.
inline Eigen::VectorXd vector_field_z(const FormationProblem& p, const Eigen::VectorXd& z) {
  if (z.size() != 2 * p.graph().m()) throw InvalidGraph("edge-state size mismatch");
  if (!z.allFinite()) throw NonFiniteState("edge state contains NaN or infinity");
  const Eigen::VectorXd diag = gain_diagonal(p, z);
  Eigen::VectorXd scaled(z.size());
  for (int l = 0; l < p.graph().m(); ++l)
    scaled.segment<2>(2 * l) = diag(l) * z.segment<2>(2 * l);
  return p.edge_adjacency2() * scaled;
}

struct CompatibilityViolation {
  int agent = -1;  // -1 when a bare law was checked
  int clause = 0;  // 1: u(d;0) != 0; 2: u_i(..;0,0,w) != 0; 3: d u/d w != 0 at e = 0
  double d1 = 0.0;
  double d2 = 0.0;
  double w = 0.0;
  double value = 0.0;
  std::string description;
};

struct CompatibilityReport {
  std::vector<CompatibilityViolation> violations;
  bool compatible() const { return violations.empty(); }
};

namespace detail {

inline void note_violation(CompatibilityReport& rep, int agent, int clause, double d1,
                           double d2, double w, double value) {
  std::ostringstream msg;
  msg << "clause " << clause << ": ";
  if (clause == 1)
    msg << "u(d=" << d1 << "; e=0) = " << value;
  else if (clause == 2)
    msg << "u(d=(" << d1 << "," << d2 << "); e=0, w=" << w << ") = " << value;
  else
    msg << "du/dw(d=(" << d1 << "," << d2 << "); e=0, w=" << w << ") = " << value;
  if (agent >= 0) msg << " [agent " << (agent + 1) << "]";
  rep.violations.push_back({agent, clause, d1, d2, w, value, msg.str()});
}

}  // namespace detail

/// Feedback through one edge must vanish at zero error.
inline CompatibilityReport check_single_law(const SingleLaw& law,
                                            const std::vector<double>& d_samples,
                                            double tol = 1e-6, int agent = -1) {
  CompatibilityReport rep;
  for (double d : d_samples) {
    const double v = law.u(d, 0.0);
    if (std::abs(v) > tol) detail::note_violation(rep, agent, 1, d, 0.0, 0.0, v);
  }
  return rep;
}

/// Feedback through a pair of edges must vanish at zero error for every
/// value of the inner-product argument, and its w-partial (by central
/// differences) must vanish there too.
inline CompatibilityReport check_dual_law(const DualLaw& law,
                                          const std::vector<double>& d_samples,
                                          const std::vector<double>& w_samples,
                                          double tol = 1e-6, int agent = -1) {
  CompatibilityReport rep;
  const DualLaw::Fn* components[2] = {&law.u1, &law.u2};
  for (double d1 : d_samples) {
    for (double d2 : d_samples) {
      for (double w : w_samples) {
        for (const auto* fn : components) {
          const double v = (*fn)(d1, d2, 0.0, 0.0, w);
          if (std::abs(v) > tol) detail::note_violation(rep, agent, 2, d1, d2, w, v);
          const double h = 1e-6 * std::max(1.0, std::abs(w));
          const double fd =
              ((*fn)(d1, d2, 0.0, 0.0, w + h) - (*fn)(d1, d2, 0.0, 0.0, w - h)) / (2.0 * h);
          if (std::abs(fd) > tol) detail::note_violation(rep, agent, 3, d1, d2, w, fd);
        }
      }
    }
  }
  return rep;
}

/// Check every agent's law. Default samples are derived from the problem's
/// own squared targets plus a fixed spread.
inline CompatibilityReport check_compatibility(const FormationProblem& p,
                                               std::vector<double> d_samples = {},
                                               std::vector<double> w_samples = {},
                                               double tol = 1e-6) {
  if (d_samples.empty()) {
    for (int l = 0; l < p.graph().m(); ++l) d_samples.push_back(p.squared_targets()(l));
    d_samples.insert(d_samples.end(), {0.25, 1.0, 4.0});
    std::sort(d_samples.begin(), d_samples.end());
    d_samples.erase(std::unique(d_samples.begin(), d_samples.end()), d_samples.end());
  }
  if (w_samples.empty()) {
    const double s = *std::max_element(d_samples.begin(), d_samples.end());
    w_samples = {-2.0 * s, -0.5 * s, 0.0, 0.5 * s, 2.0 * s};
  }
  CompatibilityReport rep;
  for (int v = 0; v < p.graph().n(); ++v) {
    const ControlLaw& law = p.laws()[static_cast<std::size_t>(v)];
    CompatibilityReport part;
    if (const auto* single = std::get_if<SingleLaw>(&law))
      part = check_single_law(*single, d_samples, tol, v);
    else if (const auto* dual = std::get_if<DualLaw>(&law))
      part = check_dual_law(*dual, d_samples, w_samples, tol, v);
    rep.violations.insert(rep.violations.end(), part.violations.begin(),
                          part.violations.end());
  }
  return rep;
}

enum class Termination { Converged, MaxTime, Degenerate };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxTime: return "max_time";
    default: return "degenerate";
  }
}

struct SimulateOptions {
  double step = 1e-3;
  double t_max = 1e3;
  /// Max-norm error threshold; <= 0 disables early exit.
  double converge_tol = 1e-9;
  /// Record every k-th step (first and last samples always kept).
  long long record_stride = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> errors;
  Termination reason = Termination::MaxTime;
};

/// Fixed-step RK4 integration of the agent dynamics. Refuses incompatible
/// laws; stops early on convergence or when two linked agents collide.
inline Trajectory simulate(const FormationProblem& p, const Eigen::VectorXd& x0,
                           const SimulateOptions& opts = {}) {
  if (!check_compatibility(p).compatible())
    throw IncompatibleLaw("control laws violate the compatibility conditions");
  if (!(opts.step > 0.0)) throw Error("integration step must be positive");

  Trajectory traj;
  const auto record = [&](double t, const Eigen::VectorXd& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.errors.push_back(error_vector(p, x));
  };

  Eigen::VectorXd x = x0;
  record(0.0, x);
  traj.reason = Termination::MaxTime;
  const auto total_steps = static_cast<long long>(std::ceil(opts.t_max / opts.step));
  const long long stride = std::max<long long>(1, opts.record_stride);
  const double h = opts.step;
  for (long long k = 1; k <= total_steps; ++k) {
    const Eigen::VectorXd k1 = vector_field_x(p, x);
    const Eigen::VectorXd k2 = vector_field_x(p, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = vector_field_x(p, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = vector_field_x(p, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = static_cast<double>(k) * h;

    bool collided = false;
    for (int l = 0; l < p.graph().m(); ++l) {
      const Edge& e = p.graph().edge(l);
      if ((x.segment<2>(2 * e.tgt) - x.segment<2>(2 * e.src)).norm() < 1e-12) {
        collided = true;
        break;
      }
    }
    if (collided) {
      record(t, x);
      traj.reason = Termination::Degenerate;
      return traj;
    }
    if (opts.converge_tol > 0.0 &&
        error_vector(p, x).cwiseAbs().maxCoeff() < opts.converge_tol) {
      record(t, x);
      traj.reason = Termination::Converged;
      return traj;
    }
    if (k % stride == 0 || k == total_steps) record(t, x);
  }
  return traj;
}

}  // namespace rigidkit
