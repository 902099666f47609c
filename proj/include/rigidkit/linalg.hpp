#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace rigidkit {

/// Singular values of a real matrix, descending.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return Eigen::VectorXd();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

/// Numerical rank: number of singular values above rel_tol * sigma_max.
inline int numeric_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  return rank;
}

}  // namespace rigidkit
