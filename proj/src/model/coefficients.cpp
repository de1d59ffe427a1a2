#include "smib/model/coefficients.hpp"

#include "smib/errors.hpp"

#include <cmath>

namespace smib::model {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string("machine parameter ") + name + " must be positive and finite");
  }
}

}  // namespace

void MachineParams::validate() const {
  require_positive(L_d, "L_d");
  require_positive(L_F, "L_F");
  require_positive(L_D, "L_D");
  require_positive(L_q, "L_q");
  require_positive(L_Q, "L_Q");
  require_positive(kM_F, "kM_F");
  require_positive(kM_D, "kM_D");
  require_positive(M_R, "M_R");
  require_positive(kM_Q, "kM_Q");
  require_positive(r, "r");
  require_positive(r_F, "r_F");
  require_positive(r_D, "r_D");
  require_positive(r_Q, "r_Q");
  require_positive(H, "H");
  require_positive(R_e, "R_e");
  require_positive(L_e, "L_e");
  require_positive(K_T, "K_T");
  require_positive(K_G, "K_G");
  require_positive(tau_T, "tau_T");
  require_positive(tau_G, "tau_G");
  require_positive(R_T, "R_T");
  require_positive(V_inf, "V_inf");
  require_positive(omega_R, "omega_R");
  require_positive(omega_base, "omega_base");
  if (!(D >= 0.0) || !std::isfinite(D)) throw InvalidInput("machine parameter D must be non-negative");
  if (!std::isfinite(alpha)) throw InvalidInput("machine parameter alpha must be finite");
  if (transient_inductance) require_positive(*transient_inductance, "transient_inductance");
  if (open_circuit_time_constant) require_positive(*open_circuit_time_constant, "open_circuit_time_constant");
}

PlantCoefficients derive_plant_coefficients(const MachineParams& p) {
  p.validate();
  PlantCoefficients c;
  const double k = std::sqrt(1.5);
  const double MF = p.kM_F / k, MD = p.kM_D / k, MQ = p.kM_Q / k, MR = p.M_R;
  const double Lde = p.L_d + p.L_e, Lqe = p.L_q + p.L_e, R = p.r + p.R_e, V = p.V_inf;

  c.k = k;
  c.tau_j = 2.0 * p.H * p.omega_R;
  c.alpha = p.alpha;
  c.vf_per_efd = p.r_F / (p.omega_R * p.kM_F);
  c.mu = Lde * MR * MR - p.L_D * p.L_F * Lde + k * k * (p.L_D * MF * MF + p.L_F * MD * MD - 2.0 * MD * MF * MR);
  c.nu = -k * k * MQ * MQ + p.L_Q * Lqe;
  if (std::abs(c.mu) < 1e-12 || std::abs(c.nu) < 1e-12) {
    throw InvalidInput("degenerate machine: mu or nu vanishes");
  }
  const double mu = c.mu, nu = c.nu;
  c.L_d1 = (MR * MR - p.L_D * p.L_F) / mu;
  c.L_F1 = (MD * MD * k * k - p.L_D * Lde) / mu;
  c.L_D1 = (MF * MF * k * k - p.L_F * Lde) / mu;
  c.M_F1 = (MD * MR - p.L_D * MF) / mu;
  c.M_D1 = (MF * MR - p.L_F * MD) / mu;
  c.M_R1 = (Lde * MR - MD * MF * k * k) / mu;
  c.L_q1 = p.L_Q / nu;
  c.L_Q1 = Lqe / nu;
  c.M_Q1 = MQ / nu;

  c.F11 = -c.L_d1 * R;
  c.F12 = k * c.M_F1 * p.r_F;
  c.F13 = k * c.M_D1 * p.r_D;
  c.F14 = -Lqe * c.L_d1;
  c.F15 = -k * MQ * c.L_d1;
  c.F16 = V * c.L_d1;
  c.G11 = -k * c.M_F1;

  c.F21 = k * c.M_F1 * R;
  c.F22 = -c.L_F1 * p.r_F;
  c.F23 = -c.M_R1 * p.r_D;
  c.F24 = k * c.M_F1 * Lqe;
  c.F25 = k * k * c.M_F1 * MQ;
  c.F26 = -V * k * c.M_F1;
  c.G21 = c.L_F1;

  c.F31 = k * c.M_D1 * R;
  c.F32 = -c.M_R1 * p.r_F;
  c.F33 = -c.L_D1 * p.r_D;
  c.F34 = k * c.M_D1 * Lqe;
  c.F35 = k * k * c.M_D1 * MQ;
  c.F36 = -V * k * c.M_D1;
  c.G31 = c.M_R1;

  c.F41 = c.L_q1 * Lde;
  c.F42 = k * MF * c.L_q1;
  c.F43 = k * MD * c.L_q1;
  c.F44 = -c.L_q1 * R;
  c.F45 = k * c.M_Q1 * p.r_Q;
  c.F46 = -V * c.L_q1;

  c.F51 = -k * c.M_Q1 * Lde;
  c.F52 = -k * k * c.M_Q1 * MF;
  c.F53 = -k * k * c.M_Q1 * MD;
  c.F54 = k * c.M_Q1 * R;
  c.F55 = -c.L_Q1 * p.r_Q;
  c.F56 = V * k * c.M_Q1;

  c.F61 = -(p.L_d - p.L_q) / c.tau_j;
  c.F62 = -k * MF / c.tau_j;
  c.F63 = -k * MD / c.tau_j;
  c.F64 = k * MQ / c.tau_j;
  c.F65 = -p.D / c.tau_j;
  c.F66 = 1.0 / c.tau_j;

  c.F81 = -1.0 / p.tau_T;
  c.F82 = p.K_T / p.tau_T;
  c.F91 = -p.K_G / (p.tau_G * p.R_T);
  c.F92 = -1.0 / p.tau_G;
  c.G92 = p.K_G / p.tau_G;

  const double Le = p.L_e;
  c.y11 = p.R_e + Le * c.F11;
  c.y12 = Le * c.F12;
  c.y13 = Le * c.F13;
  c.y14 = Le * c.F14 + Le;
  c.y15 = Le * c.F15;
  c.y16 = Le * c.F16 - V;
  c.i11 = Le * c.G11;
  c.y21 = Le * c.F41 - Le;
  c.y22 = Le * c.F42;
  c.y23 = Le * c.F43;
  c.y24 = p.R_e + Le * c.F44;
  c.y25 = Le * c.F45;
  c.y26 = Le * c.F46 + V;
  return c;
}

CdmCoefficients derive_cdm_coefficients(const MachineParams& p) {
  p.validate();
  CdmCoefficients c;
  const double V = p.V_inf;
  c.alpha = p.alpha;
  c.tau_j = 2.0 * p.H * p.omega_R;
  c.L_d_prime = p.transient_inductance.value_or(p.L_d - p.kM_F * p.kM_F / p.L_F);
  c.tau_d0_prime = p.open_circuit_time_constant.value_or(p.L_F / p.r_F);
  c.L1 = p.L_q + p.L_e;
  c.L2 = p.L_d - c.L_d_prime;
  c.L3 = c.L_d_prime + p.L_e;
  c.L4 = p.L_q - c.L_d_prime;
  c.R1 = (p.cdm_neglect_stator_resistance ? 0.0 : p.r) + p.R_e;
  c.M1 = c.R1 * c.R1 + c.L3 * c.L1;
  if (!(c.M1 > 0.0)) throw InvalidInput("degenerate reduction: M1 must be positive");

  const double L1 = c.L1, L2 = c.L2, L3 = c.L3, L4 = c.L4, R1 = c.R1, M1 = c.M1, tj = c.tau_j;
  const double td = c.tau_d0_prime, M1sq = M1 * M1;
  c.f11 = -(1.0 + L2 * L1 / M1) / td;
  c.f12 = L2 * L1 * V / (M1 * td);
  c.f13 = L2 * R1 * V / (M1 * td);
  c.g11 = 1.0 / td;

  c.f21 = -(R1 / (M1 * tj) + L4 * L1 * R1 / (M1sq * tj));
  c.f22 = (R1 / (M1 * tj) + 2.0 * L4 * L1 * R1 / (M1sq * tj)) * V;
  c.f23 = -(L3 / (M1 * tj) + L4 * L1 * L3 / (M1sq * tj) - L4 * R1 * R1 / (M1sq * tj)) * V;
  c.f24 = -(L4 * R1 * R1 / (M1sq * tj) - L4 * L1 * L3 / (M1sq * tj)) * V * V;
  c.f25 = -(L4 * L1 * R1 * V * V / (M1sq * tj));
  c.f26 = L4 * L3 * R1 * V * V / (M1sq * tj);
  c.f27 = -p.D / tj;
  c.f28 = 1.0 / tj;
  c.f41 = -1.0 / p.tau_T;
  c.f42 = p.K_T / p.tau_T;
  c.f51 = -p.K_G / (p.tau_G * p.R_T);
  c.f52 = -1.0 / p.tau_G;
  c.g55 = p.K_G / p.tau_G;

  c.Vd1 = -p.L_q * R1 / M1;
  c.Vd2 = V * p.L_q * R1 / M1;
  c.Vd3 = -V * p.L_q * L3 / M1;
  c.Vq1 = -c.L_d_prime * L1 / M1;
  c.Vq2 = V * c.L_d_prime * L1 / M1;
  c.Vq3 = V * c.L_d_prime * R1 / M1;

  c.e11 = 1.0 + L1 * L2 / M1;
  c.e12 = L1 * L2 * V / M1;
  c.e13 = R1 * L2 * V / M1;
  c.e14 = p.omega_R * p.kM_F;
  c.e15 = p.r_F / (p.omega_R * p.kM_F);

  c.p31 = 2.0 * c.f11 * c.f21 + c.f27 * c.f21;
  c.p32 = 2.0 * c.f21 * c.f12 + c.f22 * c.f11 - c.f23 + c.f27 * c.f22;
  c.p33 = 2.0 * c.f21 * c.f13 + c.f22 + c.f23 * c.f11 + c.f27 * c.f23;
  c.p34 = c.f22 * c.f12 - c.f24 + c.f27 * c.f25;
  c.p35 = c.f23 * c.f13 + c.f24 + c.f27 * c.f26;
  c.p36 = c.f22 * c.f13 + c.f23 * c.f12 + 2.0 * c.f25 - 2.0 * c.f26 + c.f27 * c.f24;
  c.p37 = c.f27 * c.f27;
  c.p38 = c.f27 * c.f28 + c.f28 * c.f41;
  c.p39 = c.f28 * c.f42;
  c.q31 = c.f23;
  c.q32 = -c.f22;
  c.q33 = c.f24;
  c.q34 = -c.f24;
  c.q35 = -2.0 * c.f25 + 2.0 * c.f26;
  c.r31 = 2.0 * c.f21 * c.g11;
  c.r32 = c.f22 * c.g11;
  c.r33 = c.f23 * c.g11;
  c.p51 = c.f42 * c.f51;
  c.p52 = c.f41 * c.f41;
  c.p53 = c.f41 * c.f42 + c.f42 * c.f52;
  c.r51 = c.f42 * c.g55;
  return c;
}

#define SMIB_NAMED(field) {#field, field}

NamedValues PlantCoefficients::named_values() const {
  return {SMIB_NAMED(k),    SMIB_NAMED(tau_j), SMIB_NAMED(mu),   SMIB_NAMED(nu),   SMIB_NAMED(L_d1),
          SMIB_NAMED(L_F1), SMIB_NAMED(L_D1),  SMIB_NAMED(M_F1), SMIB_NAMED(M_D1), SMIB_NAMED(M_R1),
          SMIB_NAMED(L_q1), SMIB_NAMED(L_Q1),  SMIB_NAMED(M_Q1), SMIB_NAMED(F11),  SMIB_NAMED(F12),
          SMIB_NAMED(F13),  SMIB_NAMED(F14),   SMIB_NAMED(F15),  SMIB_NAMED(F16),  SMIB_NAMED(G11),
          SMIB_NAMED(F21),  SMIB_NAMED(F22),   SMIB_NAMED(F23),  SMIB_NAMED(F24),  SMIB_NAMED(F25),
          SMIB_NAMED(F26),  SMIB_NAMED(G21),   SMIB_NAMED(F31),  SMIB_NAMED(F32),  SMIB_NAMED(F33),
          SMIB_NAMED(F34),  SMIB_NAMED(F35),   SMIB_NAMED(F36),  SMIB_NAMED(G31),  SMIB_NAMED(F41),
          SMIB_NAMED(F42),  SMIB_NAMED(F43),   SMIB_NAMED(F44),  SMIB_NAMED(F45),  SMIB_NAMED(F46),
          SMIB_NAMED(F51),  SMIB_NAMED(F52),   SMIB_NAMED(F53),  SMIB_NAMED(F54),  SMIB_NAMED(F55),
          SMIB_NAMED(F56),  SMIB_NAMED(F61),   SMIB_NAMED(F62),  SMIB_NAMED(F63),  SMIB_NAMED(F64),
          SMIB_NAMED(F65),  SMIB_NAMED(F66),   SMIB_NAMED(F81),  SMIB_NAMED(F82),  SMIB_NAMED(F91),
          SMIB_NAMED(F92),  SMIB_NAMED(G92),   SMIB_NAMED(y11),  SMIB_NAMED(y12),  SMIB_NAMED(y13),
          SMIB_NAMED(y14),  SMIB_NAMED(y15),   SMIB_NAMED(y16),  SMIB_NAMED(i11),  SMIB_NAMED(y21),
          SMIB_NAMED(y22),  SMIB_NAMED(y23),   SMIB_NAMED(y24),  SMIB_NAMED(y25),  SMIB_NAMED(y26)};
}

NamedValues CdmCoefficients::named_values() const {
  return {SMIB_NAMED(tau_j), SMIB_NAMED(L_d_prime), SMIB_NAMED(tau_d0_prime), SMIB_NAMED(L1),
          SMIB_NAMED(L2),    SMIB_NAMED(L3),        SMIB_NAMED(L4),           SMIB_NAMED(R1),
          SMIB_NAMED(M1),    SMIB_NAMED(Vd1),       SMIB_NAMED(Vd2),          SMIB_NAMED(Vd3),
          SMIB_NAMED(Vq1),   SMIB_NAMED(Vq2),       SMIB_NAMED(Vq3),          SMIB_NAMED(f11),
          SMIB_NAMED(f12),   SMIB_NAMED(f13),       SMIB_NAMED(f21),          SMIB_NAMED(f22),
          SMIB_NAMED(f23),   SMIB_NAMED(f24),       SMIB_NAMED(f25),          SMIB_NAMED(f26),
          SMIB_NAMED(f27),   SMIB_NAMED(f28),       SMIB_NAMED(f41),          SMIB_NAMED(f42),
          SMIB_NAMED(f51),   SMIB_NAMED(f52),       SMIB_NAMED(g11),          SMIB_NAMED(g55),
          SMIB_NAMED(e11),   SMIB_NAMED(e12),       SMIB_NAMED(e13),          SMIB_NAMED(e14),
          SMIB_NAMED(e15),   SMIB_NAMED(p31),       SMIB_NAMED(p32),          SMIB_NAMED(p33),
          SMIB_NAMED(p34),   SMIB_NAMED(p35),       SMIB_NAMED(p36),          SMIB_NAMED(p37),
          SMIB_NAMED(p38),   SMIB_NAMED(p39),       SMIB_NAMED(q31),          SMIB_NAMED(q32),
          SMIB_NAMED(q33),   SMIB_NAMED(q34),       SMIB_NAMED(q35),          SMIB_NAMED(r31),
          SMIB_NAMED(r32),   SMIB_NAMED(r33),       SMIB_NAMED(p51),          SMIB_NAMED(p52),
          SMIB_NAMED(p53),   SMIB_NAMED(r51)};
}

#undef SMIB_NAMED

}  // namespace smib::model
