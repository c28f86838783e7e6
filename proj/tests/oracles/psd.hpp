#pragma once

#include <Eigen/Dense>

#include "kaes/kernel_matrix.hpp"

namespace oracle {

inline double min_eigenvalue(const kaes::KernelMatrix& k) {
  Eigen::MatrixXd m(k.rows, k.cols);
  for (std::size_t i = 0; i < k.rows; ++i)
    for (std::size_t j = 0; j < k.cols; ++j) m(i, j) = k.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// min eigenvalue >= -1e-8 * trace.
inline bool is_psd(const kaes::KernelMatrix& k, double rel = 1e-8) {
  return min_eigenvalue(k) >= -rel * k.trace();
}

}  // namespace oracle
