#include "smib/numerics/riccati.hpp"

#include "smib/errors.hpp"
#include "smib/numerics/eigen.hpp"

#include <cmath>
#include <sstream>

namespace smib::numerics {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

void check_care_dims(const Mat& a, const Mat& b, const Mat& q, const Mat& r) {
  require(is_square(a), "solve_care: A must be square");
  require(b.rows() == a.rows(), "solve_care: B row count must match A");
  require(q.rows() == a.rows() && q.cols() == a.cols(), "solve_care: Q must match A");
  require(r.rows() == b.cols() && r.cols() == b.cols(), "solve_care: R must be m x m");
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

// Bass: with beta above the spectral abscissa, -(A + beta I) is Hurwitz and
// Z solving (A + beta I) Z + Z (A + beta I)^T = 2 B R^-1 B^T gives the
// stabilizing gain R^-1 B^T Z^-1 when (A, B) is controllable.
Mat initial_gain(const Mat& a, const Mat& b, const Mat& r_inv) {
  const double abscissa = spectral_abscissa(a);
  if (abscissa < 0.0) return Mat::Zero(b.cols(), a.rows());
  const double beta = abscissa + 1.0 + 0.1 * std::max(1.0, max_abs(a));
  const Mat shifted = a + beta * Mat::Identity(a.rows(), a.cols());
  // solve_lyapunov solves M^T X + X M = -Q; take M = shifted^T.
  const Mat z = solve_lyapunov(shifted.transpose(), -2.0 * b * r_inv * b.transpose());
  Eigen::FullPivLU<Mat> lu(symmetrize(z));
  if (!lu.isInvertible()) {
    throw NumericalError("solve_care: (A, B) not controllable enough for Bass initialization");
  }
  return r_inv * b.transpose() * lu.inverse();
}

}  // namespace

Mat solve_lyapunov(const Mat& a, const Mat& q) {
  require(is_square(a) && q.rows() == a.rows() && q.cols() == a.cols(),
          "solve_lyapunov: dimension mismatch");
  const Eigen::Index n = a.rows();
  const Mat eye = Mat::Identity(n, n);
  // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X)
  Mat kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = eye(i, j) * a.transpose() + a(j, i) * eye;
    }
  }
  const Vec rhs = -Eigen::Map<const Vec>(q.data(), n * n);
  Eigen::PartialPivLU<Mat> lu(kron);
  Vec x = lu.solve(rhs);
  // one refinement pass
  x += lu.solve(rhs - kron * x);
  return Eigen::Map<const Mat>(x.data(), n, n);
}

double care_residual(const Mat& a, const Mat& b, const Mat& q, const Mat& r, const Mat& p) {
  const Mat res = a.transpose() * p + p * a - p * b * r.ldlt().solve(b.transpose() * p) + q;
  return max_abs(res);
}

Mat solve_care(const Mat& a, const Mat& b, const Mat& q, const Mat& r, const CareOptions& options) {
  check_care_dims(a, b, q, r);
  const Eigen::LDLT<Mat> r_ldlt(r);
  if (r_ldlt.info() != Eigen::Success || !r_ldlt.isPositive() ||
      (r_ldlt.vectorD().array() <= 0.0).any()) {
    throw InvalidInput("solve_care: R must be symmetric positive definite");
  }
  const Mat r_inv = r_ldlt.solve(Mat::Identity(r.rows(), r.cols()));
  const Mat s = b * r_inv * b.transpose();

  Mat k = initial_gain(a, b, r_inv);
  Mat p = Mat::Zero(a.rows(), a.cols());
  double residual = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Mat closed = a - b * k;
    const Mat p_next = symmetrize(solve_lyapunov(closed, q + k.transpose() * r * k));
    const double change = max_abs(p_next - p) / std::max(1.0, max_abs(p_next));
    p = p_next;
    k = r_inv * b.transpose() * p;
    if (change < options.tolerance) break;
  }
  // Newton polish on the Riccati residual itself.
  for (int polish = 0; polish < 3; ++polish) {
    residual = care_residual(a, b, q, r, p);
    if (residual <= 0.01 * options.residual_limit) break;
    const Mat closed = a - s * p;
    const Mat res = a.transpose() * p + p * a - p * s * p + q;
    p = symmetrize(p + solve_lyapunov(closed, res));
  }
  residual = care_residual(a, b, q, r, p);
  if (!std::isfinite(residual) || residual > options.residual_limit) {
    std::ostringstream os;
    os << "solve_care: no convergence, residual " << residual;
    throw NumericalError(os.str(), residual);
  }
  if (!is_hurwitz(a - s * p)) {
    throw NumericalError("solve_care: solution is not stabilizing", residual);
  }
  return p;
}

Mat lqr_gain(const Mat& a, const Mat& b, const Mat& q, const Mat& r, const CareOptions& options) {
  const Mat p = solve_care(a, b, q, r, options);
  return r.ldlt().solve(b.transpose() * p);
}

KalmanDesign kalman_gain(const Mat& a, const Mat& c, const Mat& v1, const Mat& v2,
                         const CareOptions& options) {
  require(c.cols() == a.rows(), "kalman_gain: C column count must match A");
  KalmanDesign out;
  out.covariance = solve_care(a.transpose(), c.transpose(), v1, v2, options);
  out.gain = out.covariance * c.transpose() * v2.ldlt().solve(Mat::Identity(v2.rows(), v2.cols()));
  return out;
}

double filter_care_residual(const Mat& a, const Mat& c, const Mat& v1, const Mat& v2,
                            const Mat& psi) {
  return care_residual(a.transpose(), c.transpose(), v1, v2, psi);
}

}  // namespace smib::numerics
