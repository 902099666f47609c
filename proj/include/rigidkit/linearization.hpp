#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/dynamics.hpp"
#include "rigidkit/framework.hpp"
#include "rigidkit/linalg.hpp"

namespace rigidkit {

/// m x 2m block matrix with the edge displacement z_l^T in row l. Full row
/// rank whenever no edge has coincident endpoints.
inline Eigen::MatrixXd build_Z(const Framework& f) {
  const int m = f.m();
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(m, 2 * m);
  for (int l = 0; l < m; ++l) z.block<1, 2>(l, 2 * l) = edge_vector(f, l).transpose();
  return z;
}

namespace detail {

// Central difference of a dual-law component in one argument slot
// (2 = first error, 3 = second error, 4 = inner product).
inline double fd_dual(const DualLaw::Fn& fn, int slot, double d1, double d2, double e1,
                      double e2, double w) {
  double args[5] = {d1, d2, e1, e2, w};
  const double h = 1e-6 * std::max(1.0, std::abs(args[slot]));
  args[slot] += h;
  const double hi = fn(args[0], args[1], args[2], args[3], args[4]);
  args[slot] -= 2.0 * h;
  const double lo = fn(args[0], args[1], args[2], args[3], args[4]);
  return (hi - lo) / (2.0 * h);
}

inline double dual_partial(const DualLaw::Fn& analytic, const DualLaw::Fn& base, int slot,
                           double d1, double d2, double e1, double e2, double w) {
  if (analytic) return analytic(d1, d2, e1, e2, w);
  return fd_dual(base, slot, d1, d2, e1, e2, w);
}

inline double single_partial(const SingleLaw& law, double d, double e) {
  if (law.du_de) return law.du_de(d, e);
  const double h = 1e-6 * std::max(1.0, std::abs(e));
  return (law.u(d, e + h) - law.u(d, e - h)) / (2.0 * h);
}

}  // namespace detail

/// m x 2m block matrix of modified edge vectors z'_l at a design
/// equilibrium. For an agent following edges a (first) and b:
///   z'_a = 2 (du1/de_a z_a + du2/de_a z_b),
///   z'_b = 2 (du1/de_b z_a + du2/de_b z_b),
/// and z'_a = 2 u'(0) z_a for a single-target agent. The factor 2 comes from
/// differentiating the squared-length error through z; the convention is
/// locked against the finite-difference oracle in jacobian_z.
inline Eigen::MatrixXd build_Zprime(const FormationProblem& p, const Framework& f) {
  const Eigen::VectorXd e = error_vector(p, f);
  const double eq_tol = 1e-9 * std::max(1.0, p.squared_targets().maxCoeff());
  if (e.cwiseAbs().maxCoeff() > eq_tol)
    throw NotAtEquilibrium("framework is not at a design equilibrium");

  const int m = f.m();
  Eigen::MatrixXd zp = Eigen::MatrixXd::Zero(m, 2 * m);
  for (int agent = 0; agent < f.graph().n(); ++agent) {
    const auto& out = p.agent_out_edges(agent);
    if (out.empty()) continue;
    if (out.size() == 1) {
      const int l = out[0];
      const double ux = detail::single_partial(
          std::get<SingleLaw>(p.laws()[static_cast<std::size_t>(agent)]),
          p.squared_targets()(l), 0.0);
      zp.block<1, 2>(l, 2 * l) = 2.0 * ux * edge_vector(f, l).transpose();
    } else {
      const int a = out[0];
      const int b = out[1];
      const Eigen::Vector2d za = edge_vector(f, a);
      const Eigen::Vector2d zb = edge_vector(f, b);
      const double w = za.dot(zb);
      const double da = p.squared_targets()(a);
      const double db = p.squared_targets()(b);
      const auto& law = std::get<DualLaw>(p.laws()[static_cast<std::size_t>(agent)]);
      const double u1x = detail::dual_partial(law.u1_de1, law.u1, 2, da, db, 0.0, 0.0, w);
      const double u1y = detail::dual_partial(law.u1_de2, law.u1, 3, da, db, 0.0, 0.0, w);
      const double u2x = detail::dual_partial(law.u2_de1, law.u2, 2, da, db, 0.0, 0.0, w);
      const double u2y = detail::dual_partial(law.u2_de2, law.u2, 3, da, db, 0.0, 0.0, w);
      const Eigen::Vector2d zpa = 2.0 * (u1x * za + u2x * zb);
      const Eigen::Vector2d zpb = 2.0 * (u1y * za + u2y * zb);
      zp.block<1, 2>(a, 2 * a) = zpa.transpose();
      zp.block<1, 2>(b, 2 * b) = zpb.transpose();
    }
  }
  return zp;
}

struct JacobianZ {
  Eigen::MatrixXd matrix;  // 2m x 2m
  double fd_max_deviation = 0.0;
};

namespace detail {

inline Eigen::MatrixXd fd_jacobian_z(const FormationProblem& p, const Eigen::VectorXd& z0) {
  const Eigen::Index k = z0.size();
  Eigen::MatrixXd j(k, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(z0(c)));
    Eigen::VectorXd zp = z0, zm = z0;
    zp(c) += h;
    zm(c) -= h;
    j.col(c) = (vector_field_z(p, zp) - vector_field_z(p, zm)) / (2.0 * h);
  }
  return j;
}

}  // namespace detail

/// Analytic Jacobian (A_e (x) I2) * Z'^T * Z of the edge-coordinate dynamics
/// at a design equilibrium, cross-checked entrywise against a central
/// finite-difference Jacobian. A deviation beyond 1e-6 relative aborts: it
/// means the sign/factor convention is wrong, not that the data is noisy.
inline JacobianZ jacobian_z(const FormationProblem& p, const Framework& f) {
  const Eigen::MatrixXd zp = build_Zprime(p, f);
  const Eigen::MatrixXd z = build_Z(f);
  JacobianZ out;
  out.matrix = p.edge_adjacency2() * zp.transpose() * z;

  const Eigen::MatrixXd fd = detail::fd_jacobian_z(p, edge_vector_stack(f));
  const double scale = std::max({1e-300, out.matrix.cwiseAbs().maxCoeff(),
                                 fd.cwiseAbs().maxCoeff()});
  out.fd_max_deviation = (out.matrix - fd).cwiseAbs().maxCoeff() / scale;
  if (out.fd_max_deviation > 1e-6)
    throw OracleMismatch("analytic Jacobian deviates from finite differences by " +
                         format_double(out.fd_max_deviation) + " relative");
  return out;
}

/// m x m matrix Z * (A_e (x) I2) * Z'^T sharing the nonzero spectrum of the
/// full Jacobian (the two are AB and BA for A = A_e^(2) Z'^T, B = Z).
inline Eigen::MatrixXd reduced_jacobian(const FormationProblem& p, const Framework& f) {
  const Eigen::MatrixXd zp = build_Zprime(p, f);
  const Eigen::MatrixXd z = build_Z(f);
  return z * p.edge_adjacency2() * zp.transpose();
}

namespace detail {

/// Min-sum assignment on a square cost matrix; returns row -> column.
inline std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return row_to_col;
}

inline std::vector<std::complex<double>> sorted_by_magnitude(const Eigen::VectorXcd& v) {
  std::vector<std::complex<double>> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

}  // namespace detail

struct SpectrumReport {
  std::vector<std::complex<double>> full_eigenvalues;     // 2m, |.| descending
  std::vector<std::complex<double>> reduced_eigenvalues;  // m, |.| descending
  int zero_multiplicity_full = 0;
  int zero_multiplicity_reduced = 0;
  double threshold = 0.0;  // |lambda| < threshold * max|lambda| counts as zero
  double fd_max_deviation = 0.0;
  bool nonzero_counts_match = false;
  double nonzero_match_deviation = 0.0;  // relative, after min-cost matching
  bool nonzero_spectra_agree = false;    // deviation <= 1e-8
  int formula_zero_multiplicity = 0;     // the printed 2n+3-m value
  bool formula_agrees = false;           // recorded, never asserted
  int rank_full = 0;
  int rank_bound_zero_multiplicity = 0;  // 2m - rank_full
};

/// Eigenvalues of the full and reduced Jacobians at a design equilibrium,
/// with zero-multiplicity accounting. The computed multiplicities are
/// authoritative; the printed formula value is recorded alongside with an
/// agreement flag.
inline SpectrumReport spectrum_report(const FormationProblem& p, const Framework& f,
                                      double threshold = 1e-8) {
  const JacobianZ jz = jacobian_z(p, f);
  const Eigen::MatrixXd jr = reduced_jacobian(p, f);

  SpectrumReport rep;
  rep.threshold = threshold;
  rep.fd_max_deviation = jz.fd_max_deviation;

  Eigen::EigenSolver<Eigen::MatrixXd> solver_full(jz.matrix, false);
  Eigen::EigenSolver<Eigen::MatrixXd> solver_reduced(jr, false);
  rep.full_eigenvalues = detail::sorted_by_magnitude(solver_full.eigenvalues());
  rep.reduced_eigenvalues = detail::sorted_by_magnitude(solver_reduced.eigenvalues());

  const auto count_zeros = [threshold](const std::vector<std::complex<double>>& ev) {
    double top = 0.0;
    for (const auto& x : ev) top = std::max(top, std::abs(x));
    int zeros = 0;
    for (const auto& x : ev)
      if (std::abs(x) < threshold * top || top == 0.0) ++zeros;
    return zeros;
  };
  rep.zero_multiplicity_full = count_zeros(rep.full_eigenvalues);
  rep.zero_multiplicity_reduced = count_zeros(rep.reduced_eigenvalues);

  // eigenvalues are ordered by magnitude, so the nonzero ones lead
  const int nz_full =
      static_cast<int>(rep.full_eigenvalues.size()) - rep.zero_multiplicity_full;
  const int nz_reduced =
      static_cast<int>(rep.reduced_eigenvalues.size()) - rep.zero_multiplicity_reduced;
  rep.nonzero_counts_match = nz_full == nz_reduced;
  if (rep.nonzero_counts_match && nz_full > 0) {
    Eigen::MatrixXd cost(nz_full, nz_full);
    for (int i = 0; i < nz_full; ++i)
      for (int j = 0; j < nz_full; ++j)
        cost(i, j) = std::abs(rep.full_eigenvalues[static_cast<std::size_t>(i)] -
                              rep.reduced_eigenvalues[static_cast<std::size_t>(j)]);
    const auto assign = detail::hungarian_assignment(cost);
    double dev = 0.0;
    for (int i = 0; i < nz_full; ++i) dev = std::max(dev, cost(i, assign[static_cast<std::size_t>(i)]));
    const double scale = std::abs(rep.full_eigenvalues.front());
    rep.nonzero_match_deviation = scale > 0.0 ? dev / scale : dev;
  }
  rep.nonzero_spectra_agree =
      rep.nonzero_counts_match && rep.nonzero_match_deviation <= 1e-8;

  const int n = p.graph().n();
  const int m = p.graph().m();
  rep.formula_zero_multiplicity = 2 * n + 3 - m;
  rep.formula_agrees = rep.zero_multiplicity_full == rep.formula_zero_multiplicity;
  rep.rank_full = numeric_rank(jz.matrix);
  rep.rank_bound_zero_multiplicity = 2 * m - rep.rank_full;
  return rep;
}

inline void write_spectrum_report(std::ostream& out, const SpectrumReport& r) {
  out << "threshold = " << format_double(r.threshold) << "\n";
  out << "fd_max_deviation = " << format_double(r.fd_max_deviation) << "\n";
  out << "zero_multiplicity_full = " << r.zero_multiplicity_full << "\n";
  out << "zero_multiplicity_reduced = " << r.zero_multiplicity_reduced << "\n";
  out << "nonzero_counts_match = " << format_bool(r.nonzero_counts_match) << "\n";
  out << "nonzero_match_deviation = " << format_double(r.nonzero_match_deviation) << "\n";
  out << "nonzero_spectra_agree = " << format_bool(r.nonzero_spectra_agree) << "\n";
  out << "formula_zero_multiplicity = " << r.formula_zero_multiplicity << "\n";
  out << "formula_agrees = " << format_bool(r.formula_agrees) << "\n";
  out << "rank_full = " << r.rank_full << "\n";
  out << "rank_bound_zero_multiplicity = " << r.rank_bound_zero_multiplicity << "\n";
  out << "abs_full =";
  for (const auto& x : r.full_eigenvalues) out << " " << format_double(std::abs(x));
  out << "\n";
  out << "abs_reduced =";
  for (const auto& x : r.reduced_eigenvalues) out << " " << format_double(std::abs(x));
  out << "\n";
}

/// CSV rows (re, im, abs, which) for both spectra.
inline void write_eigenvalue_csv(std::ostream& out, const SpectrumReport& r) {
  out << "re,im,abs,which\n";
  for (const auto& x : r.full_eigenvalues)
    out << format_double(x.real()) << "," << format_double(x.imag()) << ","
        << format_double(std::abs(x)) << ",full\n";
  for (const auto& x : r.reduced_eigenvalues)
    out << format_double(x.real()) << "," << format_double(x.imag()) << ","
        << format_double(std::abs(x)) << ",reduced\n";
}

}  // namespace rigidkit
