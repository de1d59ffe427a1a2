#pragma once

#include "smib/linalg.hpp"
#include "smib/model/coefficients.hpp"

namespace smib::model {

/// Fifth-order CDM state layout.
namespace cdm_index {
inline constexpr int E_q = 0, omega = 1, delta = 2, T_m = 3, G_V = 4;
inline constexpr int size = 5;
}  // namespace cdm_index

/// Inputs u = [E_FD, u_T]. E_FD is clamped to the excitation limits before use
/// and the G_V derivative is zeroed when it would push past a gate limit.
Vec cdm_rhs(const CdmCoefficients& c, const Vec& x, const Vec& u,
            Network net = Network::normal, const ActuatorLimits& limits = {});

/// Electrical torque part of the swing equation (everything except f27*w + f28*T_m).
double cdm_electrical_term(const CdmCoefficients& c, double eq, double delta,
                           Network net = Network::normal);

struct CdmOutputs {
  double V_d = 0, V_q = 0, V_t = 0, omega = 0;
};

CdmOutputs cdm_outputs(const CdmCoefficients& c, const Vec& x);

}  // namespace smib::model
