#include "smib/model/equilibrium.hpp"

#include "smib/errors.hpp"
#include "smib/numerics/newton.hpp"

#include <cmath>
#include <numbers>

namespace smib::model {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < std::numbers::pi)) {
    throw InvalidInput("equilibrium: rotor angle outside the stable domain (0, pi)");
  }
}

}  // namespace

OperatingPoint find_equilibrium(const CdmCoefficients& c, const Loading& loading,
                                const std::optional<Vec>& guess) {
  if (loading.count() != 2) throw InvalidInput("equilibrium: loading must fix exactly two quantities");

  // Unknowns z = [E'_q, delta, T_m, G_V, E_FD, u_T]; w = 1.
  auto state_of = [](const Vec& z) {
    Vec x(5);
    x << z(0), 1.0, z(1), z(2), z(3);
    return x;
  };
  const ActuatorLimits wide{-1e9, 1e9, -1e9, 1e9};
  auto residual = [&](const Vec& z) {
    const Vec x = state_of(z);
    Vec u(2);
    u << z(4), z(5);
    const Vec dx = cdm_rhs(c, x, u, Network::normal, wide);
    Vec r(6);
    r << dx(0), dx(1), dx(3), dx(4), 0.0, 0.0;
    int slot = 4;
    if (loading.delta) r(slot++) = z(1) - *loading.delta;
    if (loading.eq_prime) r(slot++) = z(0) - *loading.eq_prime;
    if (loading.terminal_voltage) r(slot++) = cdm_outputs(c, x).V_t - *loading.terminal_voltage;
    if (loading.mechanical_torque) r(slot++) = z(2) - *loading.mechanical_torque;
    return r;
  };

  Vec z0(6);
  if (guess) {
    if (guess->size() != 5) throw InvalidInput("equilibrium: CDM guess must have 5 entries");
    z0 << (*guess)(0), (*guess)(2), (*guess)(3), (*guess)(4), 2.5, 1.05;
  } else {
    z0 << loading.eq_prime.value_or(1.2), loading.delta.value_or(1.0),
        loading.mechanical_torque.value_or(1.0), loading.mechanical_torque.value_or(1.0), 2.5, 1.05;
  }
  const auto sol = numerics::newton_solve(residual, z0);
  const Vec& z = sol.root;
  check_delta(z(1));

  OperatingPoint op;
  op.cdm_state = state_of(z);
  op.u0 = Vec(2);
  op.u0 << z(4), z(5);
  const auto y = cdm_outputs(c, op.cdm_state);
  op.V_t0 = y.V_t;
  op.V_d0 = y.V_d;
  op.V_q0 = y.V_q;
  op.P = -cdm_electrical_term(c, z(0), z(1)) / c.f28;
  return op;
}

OperatingPoint plant_equilibrium(const PlantCoefficients& pc, const CdmCoefficients& cc,
                                 const Loading& loading, const std::optional<Vec>& guess) {
  using namespace plant_index;
  if (loading.count() != 2) throw InvalidInput("plant equilibrium: loading must fix exactly two quantities");

  // Unknowns z = [I_d, I_F, I_D, I_q, I_Q, delta, T_m, G_V, V_F, u_T]; w = 1.
  auto state_of = [](const Vec& z) {
    Vec x(9);
    x << z(0), z(1), z(2), z(3), z(4), 1.0, z(5), z(6), z(7);
    return x;
  };
  auto inputs_of = [](const Vec& z) {
    Vec u(2);
    u << z(8), z(9);
    return u;
  };
  const ActuatorLimits wide{-1e9, 1e9, -1e9, 1e9};
  auto residual = [&](const Vec& z) {
    const Vec x = state_of(z);
    const Vec u = inputs_of(z);
    const Vec dx = plant_rhs(pc, x, u, Network::normal, wide);
    Vec r(10);
    r << dx(0), dx(1), dx(2), dx(3), dx(4), dx(5), dx(7), dx(8), 0.0, 0.0;
    int slot = 8;
    if (loading.delta) r(slot++) = z(5) - *loading.delta;
    if (loading.eq_prime) r(slot++) = cc.e14 * z(1) + cc.L2 * z(0) - *loading.eq_prime;
    if (loading.terminal_voltage) r(slot++) = plant_outputs(pc, x, u).V_t - *loading.terminal_voltage;
    if (loading.mechanical_torque) r(slot++) = z(6) - *loading.mechanical_torque;
    return r;
  };

  Vec z0(10);
  if (guess) {
    if (guess->size() != 9) throw InvalidInput("plant equilibrium: guess must have 9 entries");
    const Vec& g = *guess;
    z0 << g(I_d), g(I_F), g(I_D), g(I_q), g(I_Q), g(delta), g(T_m), g(G_V), 0.0012, 1.05;
  } else {
    z0 << -0.9, 1.6, 0.0, 0.4, 0.0, loading.delta.value_or(1.0), loading.mechanical_torque.value_or(1.0),
        loading.mechanical_torque.value_or(1.0), 0.0012, 1.05;
  }
  numerics::NewtonOptions opts;
  opts.tolerance = 1e-12;
  const auto sol = numerics::newton_solve(residual, z0, opts);
  const Vec& z = sol.root;
  check_delta(z(5));

  OperatingPoint op;
  const Vec x = state_of(z);
  const Vec u = inputs_of(z);
  op.plant_state = x;
  op.plant_inputs = u;
  const auto y = plant_outputs(pc, x, u);
  op.V_t0 = y.V_t;
  op.V_d0 = y.V_d;
  op.V_q0 = y.V_q;
  const double ia = std::hypot(x(I_d), x(I_q));
  op.stator_current = ia;
  op.P = y.V_d * x(I_d) + y.V_q * x(I_q);
  if (ia > 0.0 && y.V_t > 0.0) op.power_factor = op.P / (y.V_t * ia);

  // CDM view of the same point: E'_q from the field and d-axis currents and
  // the CDM steady excitation that holds it.
  const double eq = cc.e14 * x(I_F) + cc.L2 * x(I_d);
  op.cdm_state = Vec(5);
  op.cdm_state << eq, 1.0, x(delta), x(T_m), x(G_V);
  op.u0 = Vec(2);
  op.u0 << u(0) / cc.e15, u(1);
  return op;
}

LinearModel linearize_cdm(const CdmCoefficients& c, const OperatingPoint& op) {
  if (op.cdm_state.size() != 5) throw InvalidInput("linearize_cdm: operating point lacks a CDM state");
  if (!(op.V_t0 > 0.0)) throw InvalidInput("linearize_cdm: terminal voltage must be positive");
  const double eq = op.cdm_state(cdm_index::E_q), d = op.cdm_state(cdm_index::delta);
  const double s = std::sin(d - c.alpha), co = std::cos(d - c.alpha);

  const double df1_dx3 = -c.f12 * s + c.f13 * co;
  const double df2_dx1 = 2.0 * c.f21 * eq + c.f22 * co + c.f23 * s;
  const double df2_dx3 = -c.f22 * eq * s + c.f23 * eq * co + c.f24 * (co * co - s * s) -
                         2.0 * c.f25 * co * s + 2.0 * c.f26 * s * co;

  // Terminal-voltage row from the current output map rather than op.V_d0 so
  // that a plant-derived operating point still linearizes the CDM consistently.
  const auto y = cdm_outputs(c, op.cdm_state);
  const double vd = y.V_d / y.V_t, vq = y.V_q / y.V_t;
  const double t1 = vd * c.Vd1 + vq * c.Vq1 + vq;
  const double t2 = -vd * c.Vd2 * s + vd * c.Vd3 * co - vq * c.Vq2 * s + vq * c.Vq3 * co;

  LinearModel m;
  m.op = op;
  m.A = Mat::Zero(5, 5);
  m.A << c.f11, 0, df1_dx3, 0, 0,
         df2_dx1, c.f27, df2_dx3, c.f28, 0,
         0, 1, 0, 0, 0,
         0, 0, 0, c.f41, c.f42,
         0, c.f51, 0, 0, c.f52;
  m.B = Mat::Zero(5, 2);
  m.B(0, 0) = c.g11;
  m.B(4, 1) = c.g55;
  m.C = Mat::Zero(2, 5);
  m.C(0, 0) = t1;
  m.C(0, 2) = t2;
  m.C(1, 1) = 1.0;
  m.D = Mat::Zero(2, 2);
  return m;
}

LinearModel linearize_plant(const PlantCoefficients& c, const OperatingPoint& op) {
  if (!op.plant_state || !op.plant_inputs) throw InvalidInput("linearize_plant: operating point has no plant state");
  const Vec& x0 = *op.plant_state;
  const Vec& u0 = *op.plant_inputs;
  // Wide limits so the clamp never bites inside the difference stencil.
  ActuatorLimits open{-1e9, 1e9, -1e9, 1e9};
  auto vt = [&](const Vec& x, const Vec& u) { return plant_outputs(c, x, u).V_t; };
  const double h = 1e-6;

  LinearModel m;
  m.op = op;
  m.A = plant_jacobian(c, x0);
  m.B.resize(plant_index::size, 2);
  m.C = Mat::Zero(2, plant_index::size);
  m.D = Mat::Zero(2, 2);
  for (int j = 0; j < 2; ++j) {
    Vec up = u0, um = u0;
    up(j) += h;
    um(j) -= h;
    m.B.col(j) = (plant_rhs(c, x0, up, Network::normal, open) - plant_rhs(c, x0, um, Network::normal, open)) / (2 * h);
    m.D(0, j) = (vt(x0, up) - vt(x0, um)) / (2 * h);
  }
  for (int j = 0; j < plant_index::size; ++j) {
    Vec xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    m.C(0, j) = (vt(xp, u0) - vt(xm, u0)) / (2 * h);
  }
  m.C(1, plant_index::omega) = 1.0;
  m.B.col(0) *= c.vf_per_efd;
  m.D.col(0) *= c.vf_per_efd;
  return m;
}

}  // namespace smib::model
