#pragma once

#include "smib/linalg.hpp"
#include "smib/model/equilibrium.hpp"

#include <vector>

namespace smib::control {

using model::ActuatorLimits;
using model::LinearModel;

/// Loop-transfer-recovery filter: V1(q) = V10 + q^2 B V B^T.
struct LtrDesign {
  double q = 0.0;
  Mat V10, V, V2;
  Mat H;    // 5x2
  Mat Psi;  // 5x5
  std::vector<Complex> zeros;  // finite transmission zeros of C (sI - A)^-1 B
  bool minimum_phase = true;   // no zero with Re(z) > 0
  bool zero_on_axis = false;   // some zero with |Re(z)| <= 1e-9, so recovery is not guaranteed either
};

/// Finite transmission zeros of the square system (A, B, C, D), from the roots
/// of det of the system matrix.
std::vector<Complex> transmission_zeros(const LinearModel& m);

LtrDesign design_ltr_filter(const LinearModel& m, double q, const Mat& V10, const Mat& V, const Mat& V2);

/// q B V^{1/2} (V2^{1/2})^-1.
Mat ideal_filter_gain(const LinearModel& m, double q, const Mat& V, const Mat& V2);

/// LQR gain on (A, B); throws on Riccati failure.
Mat design_lqg_gain(const LinearModel& m, const Mat& Q, const Mat& R);

/// [[A, -B K], [H C, A - B K - H C]].
Mat closed_loop_matrix(const LinearModel& m, const Mat& K, const Mat& H);

/// Same block structure with a different plant (Ap, Bp, Cp) in place of the
/// design model. The controller blocks still use the design model.
Mat closed_loop_matrix(const LinearModel& m, const Mat& K, const Mat& H, const Mat& plant_a,
                       const Mat& plant_b, const Mat& plant_c);

/// Observer-based controller in deviation coordinates around the design
/// operating point. Measurements are absolute [V_t, w]; inputs are absolute
/// [E_FD, u_T].
class LqgController {
 public:
  LqgController(const LinearModel& m, Mat K, Mat H, ActuatorLimits limits = {});

  /// u = u0 - K xhat, clamped.
  Vec control() const;
  Vec control(const Vec& xhat) const;

  /// dxhat/dt for measurement y and applied input u.
  Vec estimator_rate(const Vec& xhat, const Vec& y, const Vec& u) const;

  /// Returns the control for the current estimate, then advances xhat by one
  /// RK4 step of length dt with y and u held. Throws NumericalError if the
  /// estimate becomes non-finite.
  Vec step(const Vec& y, double dt);

  const Vec& estimate() const { return xhat_; }
  void set_estimate(const Vec& xhat) { xhat_ = xhat; }
  const Vec& u0() const { return u0_; }
  const Vec& y0() const { return y0_; }
  const Mat& gain() const { return K_; }
  const Mat& filter_gain() const { return H_; }

 private:
  Mat A_, B_, C_, K_, H_;
  Vec u0_, y0_, xhat_;
  ActuatorLimits limits_;
};

/// u = u0 - K (x - x0), clamped.
Vec full_state_lqr_control(const Mat& K, const Vec& x, const Vec& x0, const Vec& u0,
                           const ActuatorLimits& limits = {});

/// Clamp [E_FD, u_T] to the excitation limits.
Vec clamp_inputs(const Vec& u, const ActuatorLimits& limits);

}  // namespace smib::control
