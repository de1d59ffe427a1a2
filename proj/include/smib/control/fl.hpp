#pragma once

#include "smib/linalg.hpp"
#include "smib/model/cdm.hpp"

#include <optional>

namespace smib::control {

using model::ActuatorLimits;
using model::CdmCoefficients;

/// Drift and input gain of the two linearizing channels:
/// d^3 delta / dt^3 = sigma1 + gamma1 E_FD and d^2 T_m / dt^2 = sigma2 + gamma2 u_T.
struct FlTerms {
  double sigma1 = 0, gamma1 = 0, sigma2 = 0, gamma2 = 0;
};

/// With `pinned_torque`, T_m is held by an external schedule (dT_m/dt = 0) and
/// the drifts drop the f28 z5 and f41 z5 contributions.
FlTerms fl_terms(const CdmCoefficients& c, const Vec& x, bool pinned_torque = false);

/// z = [delta, w - 1, dw/dt (input-free), T_m, dT_m/dt].
Vec transform_state(const CdmCoefficients& c, const Vec& x);

struct RelativeDegree {
  int r1 = 0, r2 = 0;
  bool singular = false;  // |gamma1| below the singularity threshold
  int total() const { return r1 + r2; }
};

/// Relative degrees of h1 = delta and h2 = T_m, found from numerically
/// computed Lie derivatives along the CDM drift and input fields.
RelativeDegree relative_degree_check(const CdmCoefficients& c, const Vec& x);

/// Numeric Lie derivatives L_f^k h and L_g L_f^k h, exposed for tests.
double lie_drift(const CdmCoefficients& c, int output, int order, const Vec& x);
Eigen::RowVector2d lie_input(const CdmCoefficients& c, int output, int order, const Vec& x);

struct FlGains {
  Eigen::RowVector3d K_G = Eigen::RowVector3d::Zero();
  double K_iG = 0.0;
  Eigen::RowVector2d K_T = Eigen::RowVector2d::Zero();
  double K_iT = 0.0;
  bool integral = false;
};

/// Chain-of-integrator error subsystems, optionally augmented with the
/// integral of the first error.
void fl_subsystems(bool with_integral, Mat& a_g, Mat& b_g, Mat& a_t, Mat& b_t);

/// LQR design on the subsystems. Q_G is 3x3 (4x4 with integral), Q_T 2x2 (3x3).
FlGains design_fl_gains(const Mat& q_g, double r_g, const Mat& q_t, double r_t, bool with_integral);

/// Closed subsystem matrices (A_G - B_G K_G, A_T - B_T K_T) for the gains.
std::pair<Mat, Mat> fl_closed_subsystems(const FlGains& gains);

struct FlOptions {
  double singularity_threshold = 1e-8;
  bool pinned_torque = false;
  ActuatorLimits limits{};
};

struct FlOutput {
  Vec u_request;  // before limits
  Vec u;          // after limits
  double w1 = 0, w2 = 0;
  FlTerms terms;
  bool efd_saturated = false;
  bool gate_at_limit = false;
  bool singular = false;
};

/// Control law. `integrals` = (e_iG, e_iT) and is ignored unless gains.integral.
/// On a singular gamma1 the excitation request is NaN and `singular` is set;
/// FlController turns that into a hold of the last good control.
FlOutput fl_control(const CdmCoefficients& c, const FlGains& gains, const Vec& z_d, const Vec& x,
                    const Eigen::Vector2d& integrals = Eigen::Vector2d::Zero(),
                    const FlOptions& options = {});

inline FlOutput nflc_control(const CdmCoefficients& c, const FlGains& gains, const Vec& z_d,
                             const Vec& x, const FlOptions& options = {}) {
  FlGains g = gains;
  g.integral = false;
  return fl_control(c, g, z_d, x, Eigen::Vector2d::Zero(), options);
}

/// Derivative of the integral states: (e1, e4). Each is frozen while its
/// actuator sits at a limit.
Eigen::Vector2d fl_integral_rate(const CdmCoefficients& c, const Vec& z_d, const Vec& x,
                                 const FlOutput& out);

/// Stateful wrapper for step-by-step use: owns the integral accumulator and
/// the last good control.
class FlController {
 public:
  FlController(CdmCoefficients c, FlGains gains, Vec z_d, FlOptions options = {});

  /// Control for state x, then advances the integrals by dt (INFLC only).
  Vec step(const Vec& x, double dt);

  const Eigen::Vector2d& integrals() const { return integrals_; }
  const FlOutput& last() const { return last_; }

 private:
  CdmCoefficients c_;
  FlGains gains_;
  Vec z_d_;
  FlOptions options_;
  Eigen::Vector2d integrals_ = Eigen::Vector2d::Zero();
  FlOutput last_;
  std::optional<Vec> last_good_;
};

/// Reference z_d from an operating point: z1d = delta0, z4d = T_m0, rest zero.
Vec fl_reference(const Vec& cdm_state0);

/// E'_q from plant quantities. Variant A uses I_F and delta; variant B uses I_F and I_d.
double reconstruct_eq_prime_a(const CdmCoefficients& c, double i_f, double delta);
double reconstruct_eq_prime_b(const CdmCoefficients& c, double i_f, double i_d);

inline double efd_to_vf(const CdmCoefficients& c, double efd) { return c.e15 * efd; }
inline double vf_to_efd(const CdmCoefficients& c, double vf) { return vf / c.e15; }

}  // namespace smib::control
