#include "smib/control/lqg.hpp"

#include "smib/errors.hpp"
#include "smib/numerics/eigen.hpp"
#include "smib/numerics/riccati.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace smib::control {

namespace {

Mat spd_sqrt(const Mat& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidInput(std::string(what) + " must be symmetric positive definite");
  }
  return es.operatorSqrt();
}

}  // namespace

// Zeros of a square system are the roots of det [[sI - A, -B], [C, D]], a
// polynomial of degree at most n. QZ on the pencil leaves infinite zeros of
// higher multiplicity at large finite values, so the polynomial is recovered
// by sampling on a circle instead and its negligible leading terms trimmed.
std::vector<Complex> transmission_zeros(const LinearModel& m) {
  const Eigen::Index n = m.A.rows(), p = m.B.cols();
  if (m.C.rows() != p) throw InvalidInput("transmission_zeros: system must be square");
  const double rho = std::max(1.0, m.A.cwiseAbs().rowwise().sum().maxCoeff());
  const Eigen::Index samples = 2 * (n + 1);
  std::vector<Complex> values(samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    const Complex s = rho * std::polar(1.0, 2.0 * std::numbers::pi * double(k) / double(samples));
    CMat sys(n + p, n + p);
    sys << s * CMat::Identity(n, n) - m.A.cast<Complex>(), -m.B.cast<Complex>(), m.C.cast<Complex>(),
        m.D.cast<Complex>();
    values[k] = sys.partialPivLu().determinant();
  }
  // Coefficients of the polynomial in t = s / rho.
  std::vector<Complex> coeff(n + 1);
  double biggest = 0.0;
  for (Eigen::Index j = 0; j <= n; ++j) {
    Complex acc = 0.0;
    for (Eigen::Index k = 0; k < samples; ++k)
      acc += values[k] * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k) / double(samples));
    coeff[j] = acc / double(samples);
    biggest = std::max(biggest, std::abs(coeff[j]));
  }
  if (biggest == 0.0) throw NumericalError("transmission_zeros: system matrix is singular for all s");
  Eigen::Index degree = n;
  while (degree > 0 && std::abs(coeff[degree]) <= 1e-10 * biggest) --degree;
  std::vector<Complex> zeros;
  if (degree == 0) return zeros;
  CMat companion = CMat::Zero(degree, degree);
  for (Eigen::Index j = 0; j < degree; ++j) companion(0, j) = -coeff[degree - 1 - j] / coeff[degree];
  if (degree > 1) companion.bottomLeftCorner(degree - 1, degree - 1).setIdentity();
  Eigen::ComplexEigenSolver<CMat> es(companion, false);
  for (Eigen::Index i = 0; i < degree; ++i) {
    Complex z = rho * es.eigenvalues()(i);
    if (std::abs(z.imag()) <= 1e-12 * rho) z.imag(0.0);
    if (std::abs(z.real()) <= 1e-12 * rho) z.real(0.0);
    zeros.push_back(z);
  }
  std::sort(zeros.begin(), zeros.end(),
            [](const Complex& a, const Complex& b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  return zeros;
}

LtrDesign design_ltr_filter(const LinearModel& m, double q, const Mat& V10, const Mat& V, const Mat& V2) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw InvalidInput("design_ltr_filter: q must be finite and >= 0");
  const Eigen::Index n = m.A.rows();
  if (V10.rows() != n || V10.cols() != n || V.rows() != m.B.cols() || V2.rows() != m.C.rows()) {
    throw InvalidInput("design_ltr_filter: weight dimensions do not conform");
  }
  LtrDesign d;
  d.q = q;
  d.V10 = V10;
  d.V = V;
  d.V2 = V2;
  const Mat v1 = V10 + q * q * m.B * V * m.B.transpose();
  const auto kal = numerics::kalman_gain(m.A, m.C, v1, V2);
  d.H = kal.gain;
  d.Psi = kal.covariance;
  d.zeros = transmission_zeros(m);
  for (const auto& z : d.zeros) {
    if (z.real() > 1e-9) d.minimum_phase = false;
    if (std::abs(z.real()) <= 1e-9) d.zero_on_axis = true;
  }
  return d;
}

Mat ideal_filter_gain(const LinearModel& m, double q, const Mat& V, const Mat& V2) {
  return q * m.B * spd_sqrt(V, "V") * spd_sqrt(V2, "V2").inverse();
}

Mat design_lqg_gain(const LinearModel& m, const Mat& Q, const Mat& R) {
  return numerics::lqr_gain(m.A, m.B, Q, R);
}

Mat closed_loop_matrix(const LinearModel& m, const Mat& K, const Mat& H) {
  return closed_loop_matrix(m, K, H, m.A, m.B, m.C);
}

Mat closed_loop_matrix(const LinearModel& m, const Mat& K, const Mat& H, const Mat& plant_a,
                       const Mat& plant_b, const Mat& plant_c) {
  const Eigen::Index n = m.A.rows(), np = plant_a.rows();
  if (K.rows() != m.B.cols() || K.cols() != n || H.rows() != n || H.cols() != m.C.rows() ||
      plant_b.rows() != np || plant_b.cols() != K.rows() || plant_c.cols() != np ||
      plant_c.rows() != H.cols()) {
    throw InvalidInput("closed_loop_matrix: dimensions do not conform");
  }
  Mat cl(np + n, np + n);
  cl << plant_a, -plant_b * K, H * plant_c, m.A - m.B * K - H * m.C;
  return cl;
}

Vec clamp_inputs(const Vec& u, const ActuatorLimits& limits) {
  Vec out = u;
  out(0) = std::clamp(u(0), limits.efd_min, limits.efd_max);
  return out;
}

LqgController::LqgController(const LinearModel& m, Mat K, Mat H, ActuatorLimits limits)
    : A_(m.A), B_(m.B), C_(m.C), K_(std::move(K)), H_(std::move(H)), limits_(limits) {
  if (K_.rows() != B_.cols() || K_.cols() != A_.rows() || H_.rows() != A_.rows() || H_.cols() != C_.rows()) {
    throw InvalidInput("LqgController: gain dimensions do not conform");
  }
  u0_ = m.op.u0;
  y0_ = Vec(2);
  y0_ << m.op.V_t0, m.op.cdm_state(model::cdm_index::omega);
  xhat_ = Vec::Zero(A_.rows());
}

Vec LqgController::control() const { return control(xhat_); }

Vec LqgController::control(const Vec& xhat) const { return clamp_inputs(u0_ - K_ * xhat, limits_); }

Vec LqgController::estimator_rate(const Vec& xhat, const Vec& y, const Vec& u) const {
  return A_ * xhat + B_ * (u - u0_) + H_ * ((y - y0_) - C_ * xhat);
}

Vec LqgController::step(const Vec& y, double dt) {
  const Vec u = control();
  auto f = [&](const Vec& s) { return estimator_rate(s, y, u); };
  const Vec k1 = f(xhat_);
  const Vec k2 = f(xhat_ + 0.5 * dt * k1);
  const Vec k3 = f(xhat_ + 0.5 * dt * k2);
  const Vec k4 = f(xhat_ + dt * k3);
  xhat_ += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!xhat_.allFinite()) throw NumericalError("lqg_step: non-finite state estimate");
  return u;
}

Vec full_state_lqr_control(const Mat& K, const Vec& x, const Vec& x0, const Vec& u0,
                           const ActuatorLimits& limits) {
  return clamp_inputs(u0 - K * (x - x0), limits);
}

}  // namespace smib::control
