#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace smib::model {

/// Raw per-unit machine, network and turbine-governor constants.
struct MachineParams {
  // Inductances (p.u.)
  double L_d = 1.70;
  double L_F = 1.65;
  double L_D = 1.605;
  double L_q = 1.64;
  double L_Q = 1.526;
  double kM_F = 1.55;
  double kM_D = 1.55;
  double M_R = 1.55;
  double kM_Q = 1.49;
  // Resistances (p.u.)
  double r = 0.001096;
  double r_F = 0.000742;
  double r_D = 0.0131;
  double r_Q = 0.0540;
  // Mechanical
  double H = 2.37;  // s
  double D = 0.0;
  // Line
  double R_e = 0.02;
  double L_e = 0.4;
  // Turbine and governor
  double K_T = 1.0;
  double K_G = 1.0;
  double tau_T = 0.5;
  double tau_G = 0.2;
  double R_T = 20.0;
  // Infinite bus
  double V_inf = 1.0;
  double alpha = 3.5598 * std::numbers::pi / 180.0;  // rad
  double omega_R = 1.0;
  double omega_base = 376.99;  // rad/s, metadata only

  // The published one-axis reduction uses rounded values of the transient
  // inductance and the open-circuit time constant, and drops the stator
  // resistance from R1. Unset optionals fall back to the raw formulas
  // L_d - kM_F^2/L_F and L_F/r_F.
  std::optional<double> transient_inductance = 0.245;
  std::optional<double> open_circuit_time_constant = 5.9;  // s
  bool cdm_neglect_stator_resistance = true;

  /// Throws InvalidInput naming the first violated invariant.
  void validate() const;
};

/// Excitation and gate limits.
struct ActuatorLimits {
  double efd_min = -5.0;
  double efd_max = 5.0;
  double gv_min = 0.0;
  double gv_max = 1.2;
};

enum class Network { normal, faulted };

}  // namespace smib::model
