#pragma once

#include "smib/linalg.hpp"

namespace smib::numerics {

struct CareOptions {
  int max_iterations = 60;
  double tolerance = 1e-12;       // relative change of P between Newton steps
  double residual_limit = 1e-8;   // max-abs residual required on return
};

/// Solves A^T X + X A = -Q for X (Kronecker formulation; intended for n <= 12).
Mat solve_lyapunov(const Mat& a, const Mat& q);

/// Continuous algebraic Riccati equation A^T P + P A - P B R^-1 B^T P + Q = 0.
///
/// Kleinman-Newton iteration. The initial stabilizing gain is K0 = 0 when A is
/// already Hurwitz, otherwise Bass's shifted-Lyapunov gain. Throws
/// NumericalError (carrying the final residual) if the iteration stalls or the
/// residual limit is missed, and InvalidInput on dimension mismatch.
Mat solve_care(const Mat& a, const Mat& b, const Mat& q, const Mat& r,
               const CareOptions& options = {});

/// Max-abs residual of the Riccati equation at P.
double care_residual(const Mat& a, const Mat& b, const Mat& q, const Mat& r, const Mat& p);

/// K = R^-1 B^T P.
Mat lqr_gain(const Mat& a, const Mat& b, const Mat& q, const Mat& r,
             const CareOptions& options = {});

struct KalmanDesign {
  Mat gain;        // H = Psi C^T V2^-1
  Mat covariance;  // Psi
};

/// Steady-state Kalman filter for process intensity V1 and measurement intensity V2:
/// A Psi + Psi A^T + V1 - Psi C^T V2^-1 C Psi = 0.
KalmanDesign kalman_gain(const Mat& a, const Mat& c, const Mat& v1, const Mat& v2,
                         const CareOptions& options = {});

double filter_care_residual(const Mat& a, const Mat& c, const Mat& v1, const Mat& v2,
                            const Mat& psi);

}  // namespace smib::numerics
