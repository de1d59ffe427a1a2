#include "smib/errors.hpp"
#include "smib/model/cdm.hpp"
#include "smib/model/coefficients.hpp"
#include "smib/model/equilibrium.hpp"
#include "smib/model/plant.hpp"
#include "smib/numerics/ode.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

using namespace smib;
using namespace smib::model;
using Catch::Approx;

namespace {

// Printed reduced-model values (4 decimals).
const std::map<std::string, double> kPrintedCdm = {
    {"Vd1", -0.0249}, {"Vd2", 0.0249},  {"Vd3", -0.8037}, {"Vq1", -0.3797}, {"Vq2", 0.3797},
    {"Vq3", 0.0037},  {"f11", -0.5517}, {"f12", 0.3822},  {"f13", 0.0037},  {"f21", -0.0101},
    {"f22", 0.0171},  {"f23", -0.3269}, {"f24", 0.2235},  {"f25", -0.0069}, {"f26", 0.0022},
    {"f27", 0.0},     {"f28", 0.2110},  {"f41", -2.0},    {"f42", 2.0},     {"f51", -0.25},
    {"f52", -5.0},    {"g11", 0.1695},  {"g55", 5.0}};

double lookup(const NamedValues& v, const std::string& name) {
  for (const auto& [k, x] : v)
    if (k == name) return x;
  throw std::runtime_error("missing " + name);
}

// Independent long-double evaluation of the plant coefficient formulas.
std::map<std::string, long double> reference_plant(const MachineParams& p) {
  using ld = long double;
  const ld k = std::sqrt(1.5L);
  const ld MF = p.kM_F / k, MD = p.kM_D / k, MQ = p.kM_Q / k, MR = p.M_R;
  const ld Ld = p.L_d, LF = p.L_F, LD = p.L_D, Lq = p.L_q, LQ = p.L_Q, Le = p.L_e;
  const ld R = ld(p.r) + ld(p.R_e), V = p.V_inf, tj = 2.0L * p.H;
  const ld mu = (Ld + Le) * MR * MR - LD * LF * (Ld + Le) + k * k * (LD * MF * MF + LF * MD * MD - 2 * MD * MF * MR);
  const ld nu = -k * k * MQ * MQ + LQ * (Le + Lq);
  const ld Ld1 = (MR * MR - LD * LF) / mu, LF1 = (MD * MD * k * k - LD * (Ld + Le)) / mu;
  const ld LD1 = (MF * MF * k * k - LF * (Ld + Le)) / mu, MF1 = (MD * MR - LD * MF) / mu;
  const ld MD1 = (MF * MR - LF * MD) / mu, MR1 = ((Ld + Le) * MR - MD * MF * k * k) / mu;
  const ld Lq1 = LQ / nu, LQ1 = (Le + Lq) / nu, MQ1 = MQ / nu;
  std::map<std::string, long double> c;
  c["mu"] = mu;
  c["nu"] = nu;
  c["F11"] = -Ld1 * R;
  c["F12"] = k * MF1 * p.r_F;
  c["F13"] = k * MD1 * p.r_D;
  c["F14"] = -(Lq + Le) * Ld1;
  c["F15"] = -k * MQ * Ld1;
  c["F16"] = V * Ld1;
  c["G11"] = -k * MF1;
  c["F21"] = k * MF1 * R;
  c["F22"] = -LF1 * p.r_F;
  c["F23"] = -MR1 * p.r_D;
  c["F24"] = k * MF1 * (Lq + Le);
  c["F25"] = k * k * MF1 * MQ;
  c["F26"] = -V * k * MF1;
  c["G21"] = LF1;
  c["F31"] = k * MD1 * R;
  c["F32"] = -MR1 * p.r_F;
  c["F33"] = -LD1 * p.r_D;
  c["F34"] = k * MD1 * (Lq + Le);
  c["F35"] = k * k * MD1 * MQ;
  c["F36"] = -V * k * MD1;
  c["G31"] = MR1;
  c["F41"] = Lq1 * (Ld + Le);
  c["F42"] = k * MF * Lq1;
  c["F43"] = k * MD * Lq1;
  c["F44"] = -Lq1 * R;
  c["F45"] = k * MQ1 * p.r_Q;
  c["F46"] = -V * Lq1;
  c["F51"] = -k * MQ1 * (Ld + Le);
  c["F52"] = -k * k * MQ1 * MF;
  c["F53"] = -k * k * MQ1 * MD;
  c["F54"] = k * MQ1 * R;
  c["F55"] = -LQ1 * p.r_Q;
  c["F56"] = V * k * MQ1;
  c["F61"] = -(Ld - Lq) / tj;
  c["F62"] = -k * MF / tj;
  c["F63"] = -k * MD / tj;
  c["F64"] = k * MQ / tj;
  c["F66"] = 1.0L / tj;
  return c;
}

Vec op1_plant_guess() {
  Vec g(9);
  g << -0.9185, 1.6315, 0.0, 0.4047, 0.0, 1.0, 1.0, 1.0012, 1.0012;
  return g;
}

}  // namespace

TEST_CASE("published reduction constants", "[model][coefficients]") {
  const MachineParams p;
  const auto pc = derive_plant_coefficients(p);
  const auto cc = derive_cdm_coefficients(p);
  CHECK(pc.tau_j == Approx(4.74).margin(1e-12));
  CHECK(cc.L_d_prime == Approx(0.245).margin(5e-4));
  CHECK(p.L_d - p.kM_F * p.kM_F / p.L_F == Approx(0.245).margin(1.5e-3));
  const auto named = cc.named_values();
  for (const auto& [name, printed] : kPrintedCdm) {
    INFO(name);
    CHECK(std::abs(lookup(named, name) - printed) <= 5e-5 + 1e-12);
  }
  CHECK(cc.r51 == Approx(10.0).margin(1e-12));
  CHECK(cc.e15 == Approx(0.000742 / 1.55).margin(1e-15));
  CHECK(cc.e15 == Approx(4.787e-4).margin(1e-7));
}

TEST_CASE("plant coefficients match an independent long-double derivation", "[model][coefficients]") {
  const MachineParams p;
  const auto pc = derive_plant_coefficients(p);
  const auto ref = reference_plant(p);
  const auto named = pc.named_values();
  for (const auto& [name, value] : ref) {
    INFO(name);
    const double got = lookup(named, name);
    CHECK(std::abs(got - double(value)) <= 1e-13 * std::max(1.0L, std::abs(value)));
  }
  const auto again = derive_plant_coefficients(p).named_values();
  for (std::size_t i = 0; i < named.size(); ++i) CHECK(named[i].second == again[i].second);
}

TEST_CASE("raw-formula reduction is available", "[model][coefficients]") {
  MachineParams p;
  p.transient_inductance.reset();
  p.open_circuit_time_constant.reset();
  p.cdm_neglect_stator_resistance = false;
  const auto cc = derive_cdm_coefficients(p);
  CHECK(cc.L_d_prime == Approx(1.70 - 1.55 * 1.55 / 1.65).margin(1e-14));
  CHECK(cc.tau_d0_prime == Approx(1.65 / 0.000742).margin(1e-9));
  CHECK(cc.R1 == Approx(0.021096).margin(1e-15));
}

TEST_CASE("parameter validation", "[model][coefficients]") {
  MachineParams p;
  p.H = -1.0;
  CHECK_THROWS_AS(derive_plant_coefficients(p), InvalidInput);
  p = MachineParams{};
  p.L_q = 0.0;
  CHECK_THROWS_AS(derive_cdm_coefficients(p), InvalidInput);
}

TEST_CASE("V_d coefficients vanish with L_q", "[model][coefficients]") {
  // L_q = 0 is rejected by validation, so check proportionality directly.
  MachineParams p;
  const auto a = derive_cdm_coefficients(p);
  p.L_q *= 0.5;
  const auto b = derive_cdm_coefficients(p);
  // V_d entries scale with L_q / M1 and M1 depends on L_q through L1.
  CHECK(b.Vd1 / a.Vd1 == Approx(0.5 * a.M1 / b.M1).epsilon(1e-12));
  CHECK(b.Vd3 / a.Vd3 == Approx(0.5 * a.M1 / b.M1).epsilon(1e-12));
}

TEST_CASE("CDM right-hand side and outputs", "[model][cdm]") {
  const auto c = derive_cdm_coefficients(MachineParams{});
  Vec x(5);
  x << 1.1, 1.0, 0.7, 0.9, 0.95;
  Vec u(2);
  u << 2.0, 1.0;
  CHECK(cdm_rhs(c, x, u)(cdm_index::delta) == 0.0);

  // Excitation above the limit is evaluated at the limit.
  Vec u7 = u, u5 = u;
  u7(0) = 7.0;
  u5(0) = 5.0;
  CHECK(cdm_rhs(c, x, u7)(0) == cdm_rhs(c, x, u5)(0));

  // Gate at its upper limit cannot open further.
  Vec xg = x;
  xg(4) = 1.2;
  Vec ug = u;
  ug(1) = 3.0;
  CHECK(cdm_rhs(c, xg, ug)(4) == 0.0);

  Vec xa(5);
  xa << 0.0, 1.0, c.alpha, 1.0, 1.0;
  const auto y = cdm_outputs(c, xa);
  CHECK(y.V_d == Approx(c.Vd2).margin(1e-15));
  CHECK(y.V_q == Approx(c.Vq2).margin(1e-15));
  CHECK(y.V_t * y.V_t == Approx(y.V_d * y.V_d + y.V_q * y.V_q).epsilon(1e-15));

  // D = 0 means the damping term contributes nothing.
  Vec xw = x;
  xw(1) = 1.3;
  CHECK(cdm_rhs(c, xw, u)(1) == cdm_rhs(c, x, u)(1));
}

TEST_CASE("plant right-hand side, Jacobian and outputs", "[model][plant]") {
  const auto c = derive_plant_coefficients(MachineParams{});
  Vec u(2);
  u << 0.0012, 1.05;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = op1_plant_guess();
    for (int i = 0; i < 9; ++i) x(i) += jitter(rng);
    x(plant_index::G_V) = 0.9;
    const Mat j = plant_jacobian(c, x);
    for (int trialdir = 0; trialdir < 3; ++trialdir) {
      Vec v(9);
      for (int i = 0; i < 9; ++i) v(i) = jitter(rng);
      const double h = 1e-6;
      const Vec fd = (plant_rhs(c, x + h * v, u) - plant_rhs(c, x - h * v, u)) / (2 * h);
      CHECK((fd - j * v).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
  Vec x = op1_plant_guess();
  CHECK(plant_rhs(c, x, u)(plant_index::delta) == 0.0);
}

TEST_CASE("operating point I", "[model][equilibrium]") {
  const MachineParams p;
  const auto cc = derive_cdm_coefficients(p);
  const auto pc = derive_plant_coefficients(p);

  Loading l;
  l.delta = 1.0;
  l.eq_prime = 1.1925;
  const auto op = find_equilibrium(cc, l);
  CHECK(op.cdm_state(2) == Approx(1.0).margin(1e-12));
  CHECK(op.cdm_state(3) == Approx(1.0012).margin(2e-3));
  CHECK(op.V_t0 == Approx(1.17233).margin(1e-3));
  CHECK(op.u0(0) == Approx(2.529).margin(1e-3));
  CHECK(op.u0(1) == Approx(1.0512).margin(1e-3));
  CHECK(max_abs(cdm_rhs(cc, op.cdm_state, op.u0)) <= 1e-10);

  Loading lp;
  lp.delta = 1.0;
  lp.terminal_voltage = 1.17233;
  const auto pop = plant_equilibrium(pc, cc, lp);
  const Vec& xs = *pop.plant_state;
  CHECK(xs(plant_index::I_d) == Approx(-0.9185).margin(1e-4));
  CHECK(xs(plant_index::I_F) == Approx(1.6315).margin(1e-4));
  CHECK(xs(plant_index::I_q) == Approx(0.4047).margin(1e-4));
  CHECK(std::abs(xs(plant_index::I_D)) <= 1e-4);
  CHECK(std::abs(xs(plant_index::I_Q)) <= 1e-4);
  CHECK(xs(plant_index::T_m) == Approx(1.0012).margin(1e-4));
  CHECK(pop.V_d0 == Approx(-0.6628).margin(1e-4));
  CHECK(pop.V_q0 == Approx(0.9670).margin(1e-4));
  CHECK(*pop.stator_current == Approx(1.0037).margin(1e-4));
  CHECK(pop.P == Approx(1.0).margin(2e-3));
  CHECK(*pop.power_factor == Approx(0.85).margin(2e-3));
  CHECK((*pop.plant_inputs)(0) == Approx(0.00121).margin(1e-5));
  CHECK(pop.cdm_state(0) == Approx(1.1925).margin(1e-3));
  CHECK(max_abs(plant_rhs(pc, xs, *pop.plant_inputs)) <= 1e-10);

  // Rounded published state as a residual check.
  Vec pub(9);
  pub << -0.9185, 1.6315, -4.6204e-6, 0.4047, 5.9539e-5, 1.0, 1.0, 1.0012, 1.0012;
  Vec upub(2);
  upub << 0.00121, 1.0512;
  CHECK(max_abs(plant_rhs(pc, pub, upub)) <= 1e-3);

  // Both models agree on V_t at the same point.
  CHECK(std::abs(cdm_outputs(cc, pop.cdm_state).V_t - pop.V_t0) <= 5e-3);
}

TEST_CASE("operating point II", "[model][equilibrium]") {
  const MachineParams p;
  const auto cc = derive_cdm_coefficients(p);
  const auto pc = derive_plant_coefficients(p);
  Loading lp;
  lp.delta = 0.88676;
  lp.terminal_voltage = 1.39899;
  const auto pop = plant_equilibrium(pc, cc, lp);
  const Vec& xs = *pop.plant_state;
  CHECK(xs(plant_index::I_d) == Approx(-1.4281).margin(1e-4));
  CHECK(xs(plant_index::I_F) == Approx(2.37786).margin(1e-4));
  CHECK(xs(plant_index::I_q) == Approx(0.37472).margin(1e-4));
  CHECK(xs(plant_index::T_m) == Approx(1.34899).margin(1e-4));
  CHECK(pop.cdm_state(0) == Approx(1.6078).margin(1e-3));
  CHECK(pop.V_q0 == Approx(1.2575).margin(1e-3));
  CHECK(pop.V_d0 == Approx(-0.6130).margin(1e-3));
  CHECK(*pop.stator_current == Approx(1.4764).margin(1e-3));
  CHECK(*pop.power_factor == Approx(0.652).margin(2e-3));

  // Pinning (delta, V_t) leaves T_m 3e-3 off on the CDM; (E'_q, T_m) keeps all
  // four quantities inside 2e-3.
  Loading l;
  l.eq_prime = 1.6078;
  l.mechanical_torque = 1.34899;
  Vec guess(5);
  guess << 1.6078, 1.0, 0.88676, 1.34899, 1.34899;
  const auto op = find_equilibrium(cc, l, guess);
  CHECK(op.cdm_state(2) == Approx(0.88676).margin(2e-3));
  CHECK(op.V_t0 == Approx(1.39899).margin(2e-3));
  CHECK(max_abs(cdm_rhs(cc, op.cdm_state, op.u0)) <= 1e-10);
  CHECK(std::abs(cdm_outputs(cc, pop.cdm_state).V_t - pop.V_t0) <= 5e-3);
}

TEST_CASE("equilibrium is locally unique and holds under simulation", "[model][equilibrium]") {
  const auto cc = derive_cdm_coefficients(MachineParams{});
  Loading l;
  l.delta = 1.0;
  l.eq_prime = 1.1925;
  const auto op = find_equilibrium(cc, l);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> pert(-0.05, 0.05);
  for (int i = 0; i < 10; ++i) {
    Vec g = op.cdm_state;
    for (int j = 0; j < 5; ++j) g(j) *= 1.0 + pert(rng);
    const auto again = find_equilibrium(cc, l, g);
    CHECK((again.cdm_state - op.cdm_state).cwiseAbs().maxCoeff() <= 1e-8);
  }

  numerics::OdeProblem prob;
  prob.rhs = [&](double, const Vec& x, int) { return cdm_rhs(cc, x, op.u0); };
  prob.x0 = op.cdm_state;
  prob.t1 = 100.0;
  prob.dt = 0.01;
  const auto tr = numerics::integrate(prob);
  double worst = 0;
  for (const auto& s : tr.states) worst = std::max(worst, max_abs(s - op.cdm_state));
  CHECK(worst <= 1e-6);

  Loading bad;
  bad.delta = 1.0;
  CHECK_THROWS_AS(find_equilibrium(cc, bad), InvalidInput);
}

TEST_CASE("plant equilibrium holds under simulation", "[model][equilibrium]") {
  const MachineParams p;
  const auto cc = derive_cdm_coefficients(p);
  const auto pc = derive_plant_coefficients(p);
  Loading lp;
  lp.delta = 1.0;
  lp.terminal_voltage = 1.17233;
  const auto pop = plant_equilibrium(pc, cc, lp);
  numerics::OdeProblem prob;
  prob.rhs = [&](double, const Vec& x, int) { return plant_rhs(pc, x, *pop.plant_inputs); };
  prob.x0 = *pop.plant_state;
  prob.t1 = 100.0;
  prob.dt = 1e-3;
  const auto tr = numerics::integrate(prob);
  double worst = 0;
  for (const auto& s : tr.states) worst = std::max(worst, max_abs(s - *pop.plant_state));
  CHECK(worst <= 1e-6);
}

TEST_CASE("linearized CDM", "[model][linearize]") {
  const auto cc = derive_cdm_coefficients(MachineParams{});
  Loading l;
  l.delta = 1.0;
  l.eq_prime = 1.1925;
  const auto op = find_equilibrium(cc, l);
  const auto m = linearize_cdm(cc, op);

  int nonzero = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) nonzero += m.B(i, j) != 0.0;
  CHECK(nonzero == 2);
  CHECK(m.B(0, 0) == cc.g11);
  CHECK(m.B(4, 1) == cc.g55);
  CHECK(m.A.row(2) == (Eigen::RowVectorXd(5) << 0, 1, 0, 0, 0).finished());
  CHECK(m.C.row(1) == (Eigen::RowVectorXd(5) << 0, 1, 0, 0, 0).finished());
  CHECK(max_abs(m.D) == 0.0);

  const double h = 1e-6;
  Mat fa(5, 5), fc(1, 5), fb(5, 2);
  for (int j = 0; j < 5; ++j) {
    Vec e = Vec::Zero(5);
    e(j) = h;
    fa.col(j) = (cdm_rhs(cc, op.cdm_state + e, op.u0) - cdm_rhs(cc, op.cdm_state - e, op.u0)) / (2 * h);
    fc(0, j) = (cdm_outputs(cc, op.cdm_state + e).V_t - cdm_outputs(cc, op.cdm_state - e).V_t) / (2 * h);
  }
  for (int j = 0; j < 2; ++j) {
    Vec e = Vec::Zero(2);
    e(j) = h;
    fb.col(j) = (cdm_rhs(cc, op.cdm_state, op.u0 + e) - cdm_rhs(cc, op.cdm_state, op.u0 - e)) / (2 * h);
  }
  CHECK(max_abs(fa - m.A) <= 1e-6);
  CHECK(max_abs(fb - m.B) <= 1e-6);
  CHECK(max_abs(fc - m.C.row(0)) <= 1e-6);

  OperatingPoint zero = op;
  zero.V_t0 = 0.0;
  CHECK_THROWS_AS(linearize_cdm(cc, zero), InvalidInput);
}
