#pragma once

#include "smib/linalg.hpp"
#include "smib/model/cdm.hpp"
#include "smib/model/plant.hpp"

#include <optional>

namespace smib::model {

/// Two of the four loading quantities pin an operating point. The unset ones
/// are solved for together with the steady inputs.
struct Loading {
  std::optional<double> delta;
  std::optional<double> eq_prime;
  std::optional<double> terminal_voltage;
  std::optional<double> mechanical_torque;

  int count() const {
    return int(delta.has_value()) + int(eq_prime.has_value()) + int(terminal_voltage.has_value()) +
           int(mechanical_torque.has_value());
  }
};

struct OperatingPoint {
  Vec cdm_state;  // [E'_q, w, delta, T_m, G_V]
  Vec u0;         // [E_FD, u_T]
  double V_t0 = 0, V_d0 = 0, V_q0 = 0;
  double P = 0;  // air-gap power, equal to T_m at w = 1
  std::optional<double> power_factor;

  // Filled by plant_equilibrium.
  std::optional<Vec> plant_state;
  std::optional<Vec> plant_inputs;  // [V_F, u_T]
  std::optional<double> stator_current;
};

/// Steady state of the CDM for the given loading. Throws NumericalError when
/// Newton fails and InvalidInput when the loading does not pin exactly two
/// quantities or the root lies outside 0 < delta < pi.
OperatingPoint find_equilibrium(const CdmCoefficients& c, const Loading& loading,
                                const std::optional<Vec>& guess = std::nullopt);

/// Steady state of the nine-state plant. Loading may use delta, terminal
/// voltage, torque, or E'_q reconstructed as kM_F I_F + L2 I_d (the L2 and
/// kM_F values come from the CDM coefficients).
OperatingPoint plant_equilibrium(const PlantCoefficients& pc, const CdmCoefficients& cc,
                                 const Loading& loading,
                                 const std::optional<Vec>& guess = std::nullopt);

/// Small-signal model about an operating point, in deviation coordinates.
struct LinearModel {
  Mat A, B, C, D;
  OperatingPoint op;
};

/// Analytic Jacobians of cdm_rhs and of (V_t, w).
LinearModel linearize_cdm(const CdmCoefficients& c, const OperatingPoint& op);

/// Nine-state plant about op.plant_state. Input columns are [E_FD, u_T], so the
/// field-voltage column is scaled through the field bridge; outputs are (V_t, w).
/// A is analytic, B, C, D are central differences.
LinearModel linearize_plant(const PlantCoefficients& c, const OperatingPoint& op);

}  // namespace smib::model
