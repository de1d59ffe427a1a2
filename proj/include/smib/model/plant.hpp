#pragma once

#include "smib/linalg.hpp"
#include "smib/model/coefficients.hpp"

namespace smib::model {

/// Ninth-order plant state layout.
namespace plant_index {
inline constexpr int I_d = 0, I_F = 1, I_D = 2, I_q = 3, I_Q = 4, omega = 5, delta = 6, T_m = 7, G_V = 8;
inline constexpr int size = 9;
}  // namespace plant_index

/// Inputs u = [V_F, u_T]. V_F is clamped to the excitation limits mapped
/// through the field bridge, and the G_V derivative is zeroed at a gate limit.
Vec plant_rhs(const PlantCoefficients& c, const Vec& x, const Vec& u,
              Network net = Network::normal, const ActuatorLimits& limits = {});

/// Analytic state Jacobian of plant_rhs.
Mat plant_jacobian(const PlantCoefficients& c, const Vec& x, Network net = Network::normal);

struct PlantOutputs {
  double V_d = 0, V_q = 0, V_t = 0, omega = 0;
};

PlantOutputs plant_outputs(const PlantCoefficients& c, const Vec& x, const Vec& u);

}  // namespace smib::model
