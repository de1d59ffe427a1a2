#include "smib/scenarios/presets.hpp"

#include "smib/model/cdm.hpp"

#include <cmath>

namespace smib::scenarios {

model::Loading cdm_loading(OpId id) {
  model::Loading l;
  if (id == OpId::I) {
    l.delta = 1.0;
    l.eq_prime = 1.1925;
  } else {
    l.eq_prime = 1.6078;
    l.mechanical_torque = 1.34899;
  }
  return l;
}

Vec cdm_guess(OpId id) {
  Vec g(5);
  if (id == OpId::I)
    g << 1.1925, 1.0, 1.0, 1.0012, 1.0012;
  else
    g << 1.6078, 1.0, 0.88676, 1.34899, 1.34899;
  return g;
}

model::Loading plant_loading(OpId id) {
  model::Loading l;
  if (id == OpId::I) {
    l.delta = 1.0;
    l.terminal_voltage = 1.17233;
  } else {
    l.delta = 0.88676;
    l.terminal_voltage = 1.39899;
  }
  return l;
}

model::OperatingPoint published_reference(OpId id, const model::CdmCoefficients& c) {
  model::OperatingPoint op;
  op.cdm_state.resize(5);
  if (id == OpId::I) {
    op.cdm_state << 1.1925, 1.0, 1.0, 1.0012, 1.0012;
    op.V_t0 = 1.17233;
  } else {
    op.cdm_state << 1.6078, 1.0, 0.88676, 1.34899, 1.34899;
    op.V_t0 = 1.39899;
  }
  const double eq = op.cdm_state(0), d = op.cdm_state(2) - c.alpha, tm = op.cdm_state(3);
  op.u0.resize(2);
  op.u0 << -(c.f11 * eq + c.f12 * std::cos(d) + c.f13 * std::sin(d)) / c.g11, -(c.f51 + c.f52 * tm) / c.g55;
  const auto out = model::cdm_outputs(c, op.cdm_state);
  op.V_d0 = out.V_d;
  op.V_q0 = out.V_q;
  op.P = tm;
  return op;
}

Mat published_lqg_gain() {
  Mat k(2, 5);
  k << 87.3944, -216.7677, -60.7947, -13.4353, -0.0618,
       -1.8244, 98.0650, 17.7303, 42.1399, 85.8027;
  return k;
}

control::FlGains published_nflc_gains() {
  control::FlGains g;
  g.K_G << 0.09129, 0.42015, 0.92121;
  g.K_T << 0.09129, 0.43693;
  return g;
}

control::FlGains published_inflc_gains() {
  control::FlGains g;
  g.integral = true;
  g.K_G << 0.00733, 0.06795, 0.36864;
  g.K_iG = 0.00039;
  g.K_T << 0.01077, 0.14674;
  g.K_iT = 0.00039;
  return g;
}

LtrWeights published_ltr_weights() {
  return {5.25, Mat::Identity(5, 5), Mat::Identity(2, 2), 0.65 * Mat::Identity(2, 2)};
}

LtrWeights frequency_study_weights(double q) {
  return {q, Mat::Identity(5, 5), Mat::Identity(2, 2), Mat::Identity(2, 2)};
}

}  // namespace smib::scenarios
