#pragma once

#include "smib/model/params.hpp"

#include <string>
#include <utility>
#include <vector>

namespace smib::model {

using NamedValues = std::vector<std::pair<std::string, double>>;

/// Closed-form coefficients of the ninth-order dq plant.
struct PlantCoefficients {
  double k = 0, tau_j = 0, mu = 0, nu = 0;
  double L_d1 = 0, L_F1 = 0, L_D1 = 0, M_F1 = 0, M_D1 = 0, M_R1 = 0, L_q1 = 0, L_Q1 = 0, M_Q1 = 0;
  double F11 = 0, F12 = 0, F13 = 0, F14 = 0, F15 = 0, F16 = 0, G11 = 0;
  double F21 = 0, F22 = 0, F23 = 0, F24 = 0, F25 = 0, F26 = 0, G21 = 0;
  double F31 = 0, F32 = 0, F33 = 0, F34 = 0, F35 = 0, F36 = 0, G31 = 0;
  double F41 = 0, F42 = 0, F43 = 0, F44 = 0, F45 = 0, F46 = 0;
  double F51 = 0, F52 = 0, F53 = 0, F54 = 0, F55 = 0, F56 = 0;
  double F61 = 0, F62 = 0, F63 = 0, F64 = 0, F65 = 0, F66 = 0;
  double F81 = 0, F82 = 0;
  double F91 = 0, F92 = 0, G92 = 0;
  double y11 = 0, y12 = 0, y13 = 0, y14 = 0, y15 = 0, y16 = 0, i11 = 0;
  double y21 = 0, y22 = 0, y23 = 0, y24 = 0, y25 = 0, y26 = 0;
  double alpha = 0;
  double vf_per_efd = 0;  // field-voltage bridge r_F / (omega_R kM_F)

  NamedValues named_values() const;
};

/// Coefficients of the fifth-order control-design model and everything
/// derived from them (output map, field bridge, linearizing-control constants).
struct CdmCoefficients {
  double tau_j = 0, L_d_prime = 0, tau_d0_prime = 0;
  double L1 = 0, L2 = 0, L3 = 0, L4 = 0, R1 = 0, M1 = 0;
  double f11 = 0, f12 = 0, f13 = 0, g11 = 0;
  double f21 = 0, f22 = 0, f23 = 0, f24 = 0, f25 = 0, f26 = 0, f27 = 0, f28 = 0;
  double f41 = 0, f42 = 0;
  double f51 = 0, f52 = 0, g55 = 0;
  double Vd1 = 0, Vd2 = 0, Vd3 = 0, Vq1 = 0, Vq2 = 0, Vq3 = 0;
  double e11 = 0, e12 = 0, e13 = 0, e14 = 0, e15 = 0;
  double p31 = 0, p32 = 0, p33 = 0, p34 = 0, p35 = 0, p36 = 0, p37 = 0, p38 = 0, p39 = 0;
  double q31 = 0, q32 = 0, q33 = 0, q34 = 0, q35 = 0;
  double r31 = 0, r32 = 0, r33 = 0;
  double p51 = 0, p52 = 0, p53 = 0, r51 = 0;
  double alpha = 0;

  NamedValues named_values() const;
};

/// Throws InvalidInput for invalid parameters or a degenerate machine (mu or nu ~ 0).
PlantCoefficients derive_plant_coefficients(const MachineParams& p);

/// Throws InvalidInput when M1 <= 0.
CdmCoefficients derive_cdm_coefficients(const MachineParams& p);

}  // namespace smib::model
