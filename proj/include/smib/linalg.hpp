#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace smib {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Largest absolute entry; 0 for an empty matrix.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_square(const Mat& m) { return m.rows() == m.cols(); }

}  // namespace smib
