#include "smib/io/acceptance.hpp"

#include "smib/control/fl.hpp"
#include "smib/control/lqg.hpp"
#include "smib/errors.hpp"
#include "smib/model/cdm.hpp"
#include "smib/model/coefficients.hpp"
#include "smib/model/equilibrium.hpp"
#include "smib/model/plant.hpp"
#include "smib/numerics/eigen.hpp"
#include "smib/numerics/ode.hpp"
#include "smib/numerics/riccati.hpp"
#include "smib/scenarios/presets.hpp"
#include "smib/scenarios/scenario.hpp"
#include "smib/scenarios/studies.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace smib::io {

using namespace smib::model;
using scenarios::ControllerKind;
using scenarios::OpId;

namespace {

// Pinned tolerances and budgets.
constexpr double kCoeffTol = 5e-5;          // 4 printed decimals
constexpr double kOpTol = 2e-3;             // rounded operating-point table
constexpr double kGmTolDb = 0.5;
constexpr double kPmTolDeg = 1.0;
constexpr double kCase1Tol = 1e-3;
constexpr double kRecoveryBand = 0.005;     // relative, after the fault
constexpr double kTable3RelTol = 0.5;
constexpr double kRiccatiTol = 1e-8;
constexpr double kSeparationTol = 1e-8;
constexpr double kJacobianTol = 1e-6;

std::string num(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

const CdmCoefficients& cdm() {
  static const CdmCoefficients c = derive_cdm_coefficients(MachineParams{});
  return c;
}
const PlantCoefficients& plant() {
  static const PlantCoefficients c = derive_plant_coefficients(MachineParams{});
  return c;
}

double named(const NamedValues& v, const std::string& key) {
  for (const auto& [k, x] : v)
    if (k == key) return x;
  throw InvalidInput("no coefficient named " + key);
}

// ---------------------------------------------------------------- 1
CriterionResult coefficients() {
  CriterionResult r{1, "printed reduced-model coefficients to 4 decimals", true, "", 0.0};
  const std::map<std::string, double> printed = {
      {"Vd1", -0.0249}, {"Vd2", 0.0249},  {"Vd3", -0.8037}, {"Vq1", -0.3797}, {"Vq2", 0.3797},
      {"Vq3", 0.0037},  {"f11", -0.5517}, {"f12", 0.3822},  {"f13", 0.0037},  {"f21", -0.0101},
      {"f22", 0.0171},  {"f23", -0.3269}, {"f24", 0.2235},  {"f25", -0.0069}, {"f26", 0.0022},
      {"f27", 0.0},     {"f28", 0.2110},  {"f41", -2.0},    {"f42", 2.0},     {"f51", -0.25},
      {"f52", -5.0},    {"g11", 0.1695},  {"g55", 5.0},     {"tau_j", 4.74},  {"L_d_prime", 0.245}};
  const auto values = derive_cdm_coefficients(MachineParams{}).named_values();
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, target] : printed) {
    const double e = std::abs(named(values, name) - target);
    if (e > worst) {
      worst = e;
      worst_name = name;
    }
  }
  r.pass = worst <= kCoeffTol;
  r.detail = std::to_string(printed.size()) + " values, max |err| " + num(worst, 3) +
             (worst_name.empty() ? "" : " (" + worst_name + ")") + ", tol " + num(kCoeffTol);
  return r;
}

// ---------------------------------------------------------------- 2
CriterionResult operating_points() {
  CriterionResult r{2, "operating points I and II", true, "", 0.0};
  struct Row {
    OpId id;
    double delta, eq, tm, vt, id0, if0;
  };
  const Row rows[] = {{OpId::I, 1.0, 1.1925, 1.0012, 1.17233, -0.9185, 1.6315},
                      {OpId::II, 0.88676, 1.6078, 1.34899, 1.39899, -1.4281, 2.37786}};
  double worst = 0.0;
  for (const auto& row : rows) {
    const auto op = find_equilibrium(cdm(), scenarios::cdm_loading(row.id), scenarios::cdm_guess(row.id));
    const auto pop = plant_equilibrium(plant(), cdm(), scenarios::plant_loading(row.id));
    const Vec& px = *pop.plant_state;
    for (double e : {op.cdm_state(cdm_index::delta) - row.delta, op.cdm_state(cdm_index::E_q) - row.eq,
                     op.cdm_state(cdm_index::T_m) - row.tm, op.V_t0 - row.vt,
                     px(plant_index::delta) - row.delta, pop.cdm_state(cdm_index::E_q) - row.eq,
                     px(plant_index::T_m) - row.tm, pop.V_t0 - row.vt, px(plant_index::I_d) - row.id0,
                     px(plant_index::I_F) - row.if0})
      worst = std::max(worst, std::abs(e));
  }
  r.pass = worst <= kOpTol;
  r.detail = "reduced and nine-state equilibria, max |err| " + num(worst, 3) + ", tol " + num(kOpTol);
  return r;
}

// ---------------------------------------------------------------- 3
CriterionResult margins() {
  CriterionResult r{3, "loop margins of the q study", true, "", 0.0};
  struct Target {
    std::optional<double> gm11, pm11, gm22, pm22;  // nullopt = infinite
  };
  const Target targets[] = {{std::nullopt, 75.616, 8.347, std::nullopt},
                            {std::nullopt, 71.793, 45.195, std::nullopt},
                            {0.0684, 77.533, 0.4622, 69.475},
                            {std::nullopt, 69.501, 3.561, 36.046}};
  const auto table = scenarios::margin_table(scenarios::FrequencyStudy{});
  std::ostringstream os;
  auto match = [&](const freq::Margin& m, const std::optional<double>& t, double tol) {
    if (!t) return m.unbounded();
    return !m.unbounded() && std::abs(*m.value - *t) <= tol;
  };
  auto show = [](const std::optional<double>& t) { return t ? num(*t) : std::string("inf"); };
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    const auto& t = targets[i];
    // The criterion names PM(H11) and GM(H22); the infinite entries of the
    // other two columns are matched categorically.
    const bool ok = match(row.h11.phase_deg, t.pm11, kPmTolDeg) && match(row.h22.gain_db, t.gm22, kGmTolDb) &&
                    (t.gm11.has_value() || row.h11.gain_db.unbounded()) &&
                    (t.pm22.has_value() || row.h22.phase_deg.unbounded());
    r.pass = r.pass && ok;
    os << (i ? "; " : "") << "q=" << row.loop.label << " PM11 " << row.h11.phase_deg.str(3) << "/" << show(t.pm11)
       << " GM22 " << row.h22.gain_db.str(3) << "/" << show(t.gm22) << " GM11 " << row.h11.gain_db.str(3) << " PM22 "
       << row.h22.phase_deg.str(3);
  }
  r.detail = os.str();
  return r;
}

// ---------------------------------------------------------------- 4
CriterionResult nyquist() {
  CriterionResult r{4, "Nyquist count and closed-loop spectrum", true, "", 0.0};
  // The instability is a property of the reduced-model controller on the
  // nine-state plant; see the README.
  const auto rows = scenarios::nyquist_table(scenarios::FrequencyStudy{}, true);
  std::ostringstream os;
  for (const auto& row : rows) {
    const bool high = !row.loop.ideal && row.loop.q == scenarios::kHighQ;
    const int want = high ? 1 : 0;
    bool ok = !row.det.indeterminate && row.det.clockwise == want;
    if (high) ok = ok && row.max_real_eig > 0.0;
    if (!row.loop.ideal && row.loop.q == scenarios::kFrequencyStudyQ) ok = ok && row.max_real_eig < 0.0;
    r.pass = r.pass && ok;
    os << (row.loop.label == rows.front().loop.label ? "" : "; ") << "q=" << row.loop.label
       << " N=" << row.det.clockwise << " (H11 " << row.h11.clockwise << ", H22 " << row.h22.clockwise
       << ") P=" << row.open_loop_unstable << " max Re " << num(row.max_real_eig, 4);
  }
  r.detail = os.str();
  return r;
}

// ---------------------------------------------------------------- 5
CriterionResult case1() {
  CriterionResult r{5, "case 1 reaches operating point I", true, "", 0.0};
  const std::map<std::string, double> target = {{"V_t", 1.17233}, {"omega", 1.0}, {"delta", 1.0},
                                                {"T_m", 1.0012},  {"E_FD", 2.529}, {"u_T", 1.0512}};
  std::ostringstream os;
  for (auto k : {ControllerKind::nflc, ControllerKind::inflc, ControllerKind::lqg}) {
    const auto run = scenarios::run_case(scenarios::make_case(1, k));
    double worst = run.diverged ? std::numeric_limits<double>::infinity() : 0.0;
    if (!run.diverged)
      for (const auto& [ch, v] : target) worst = std::max(worst, std::abs(run.trace.channel(ch).back() - v));
    r.pass = r.pass && worst <= kCase1Tol;
    os << (k == ControllerKind::nflc ? "" : "; ") << scenarios::to_string(k) << " max |err| " << num(worst, 3);
  }
  r.detail = os.str() + ", tol " + num(kCase1Tol);
  return r;
}

// ---------------------------------------------------------------- 6
CriterionResult case2() {
  CriterionResult r{6, "case 2 fault, recovery and settling ranking", true, "", 0.0};
  std::map<ControllerKind, double> settle;
  std::ostringstream os;
  for (auto k : {ControllerKind::inflc, ControllerKind::nflc, ControllerKind::lqg}) {
    const auto run = scenarios::run_case(scenarios::make_case(2, k));
    if (run.diverged) {
      r.pass = false;
      os << scenarios::to_string(k) << " diverged; ";
      continue;
    }
    const auto& t = run.trace.times;
    const auto& vt = run.trace.channel("V_t");
    double pre = 0.0, in_fault = 0.0, after = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] < 50.0) pre = vt[i];
      if (t[i] >= 50.0 && t[i] <= 50.2) in_fault = std::max(in_fault, std::abs(vt[i]));
    }
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] >= 70.0) after = std::max(after, std::abs(vt[i] - pre) / pre);
    const auto& m = run.metrics.channels.at("omega");
    settle[k] = m.settling_time ? *m.settling_time - 50.0 : std::numeric_limits<double>::infinity();
    r.pass = r.pass && in_fault == 0.0 && after <= kRecoveryBand;
    os << scenarios::to_string(k) << ": V_t in fault " << num(in_fault, 3) << ", dev after 70 s " << num(100 * after, 3)
       << "%, omega settling " << num(settle[k], 5) << " s; ";
  }
  if (settle.size() == 3) {
    const bool ranked = settle[ControllerKind::inflc] <= settle[ControllerKind::nflc] &&
                        settle[ControllerKind::nflc] <= settle[ControllerKind::lqg];
    r.pass = r.pass && ranked;
    os << "ranking inflc<=nflc<=lqg " << (ranked ? "holds" : "fails");
  }
  r.detail = os.str();
  return r;
}

// ---------------------------------------------------------------- 7
CriterionResult table3() {
  CriterionResult r{7, "steady-state errors on the nine-state plant", true, "", 0.0};
  const ControllerKind kinds[] = {ControllerKind::nflc, ControllerKind::inflc, ControllerKind::lqg,
                                  ControllerKind::lqr};
  const double vt_i[] = {0.0012, 0.00233, 0.00013, 0.00025};
  const double vt_ii[] = {0.00129, 0.00194, 0.00401, 0.00037};
  const double d_ii[] = {0.00076, 0.00684, 0.00854, 0.00066};
  std::ostringstream os;
  double vt1[4], vt2[4], d2[4];
  for (int i = 0; i < 4; ++i) {
    for (int c : {4, 5}) {
      const auto run = scenarios::run_case(scenarios::make_case(c, kinds[i]));
      const double inf = std::numeric_limits<double>::infinity();
      const double ev = run.diverged ? inf : run.metrics.channels.at("V_t").steady_state_error;
      const double ed = run.diverged ? inf : run.metrics.channels.at("delta").steady_state_error;
      if (c == 4) {
        vt1[i] = ev;
      } else {
        vt2[i] = ev;
        d2[i] = ed;
      }
    }
  }
  auto within = [](double got, double want) { return std::abs(got - want) <= kTable3RelTol * want; };
  int matched = 0;
  for (int i = 0; i < 4; ++i) {
    matched += within(vt1[i], vt_i[i]) + within(vt2[i], vt_ii[i]) + within(d2[i], d_ii[i]);
    os << scenarios::to_string(kinds[i]) << " Vt(I) " << num(vt1[i], 3) << "/" << vt_i[i] << " Vt(II) "
       << num(vt2[i], 3) << "/" << vt_ii[i] << " d(II) " << num(d2[i], 3) << "/" << d_ii[i] << "; ";
  }
  const bool lqg_best_i = vt1[2] <= std::min({vt1[0], vt1[1], vt1[3]});
  const bool lqr_best_ii = vt2[3] <= std::min({vt2[0], vt2[1], vt2[2]}) && d2[3] <= std::min({d2[0], d2[1], d2[2]});
  r.pass = matched == 12 && lqg_best_i && lqr_best_ii;
  os << matched << "/12 within 50%, LQG best at I " << (lqg_best_i ? "yes" : "no") << ", LQR best at II "
     << (lqr_best_ii ? "yes" : "no");
  r.detail = os.str();
  return r;
}

// ---------------------------------------------------------------- 8
CriterionResult properties() {
  CriterionResult r{8, "property suite", true, "", 0.0};
  std::ostringstream os;
  auto note = [&](const std::string& name, bool ok, const std::string& value) {
    r.pass = r.pass && ok;
    os << name << " " << value << (ok ? "" : " FAIL") << "; ";
  };

  const auto op = find_equilibrium(cdm(), scenarios::cdm_loading(OpId::I), scenarios::cdm_guess(OpId::I));
  const LinearModel m = linearize_cdm(cdm(), op);
  const Mat K = scenarios::published_lqg_gain();

  // Riccati residuals: control and filter equations.
  {
    const Mat q = Mat::Identity(5, 5), rr = Mat::Identity(2, 2);
    const Mat p = numerics::solve_care(m.A, m.B, q, rr);
    double worst = numerics::care_residual(m.A, m.B, q, rr, p) / std::max(1.0, p.norm());
    for (double qq : {0.0, 9.0005, 100.0}) {
      const auto w = scenarios::frequency_study_weights(qq);
      const auto d = control::design_ltr_filter(m, qq, w.V10, w.V, w.V2);
      const Mat v1 = d.V10 + qq * qq * m.B * d.V * m.B.transpose();
      worst = std::max(worst, numerics::filter_care_residual(m.A, m.C, v1, d.V2, d.Psi) / std::max(1.0, d.Psi.norm()));
    }
    note("riccati", worst <= kRiccatiTol, num(worst, 3));
  }
  // Separation: spectrum of the closed loop is the union of both designs.
  {
    double worst = 0.0;
    for (double qq : {0.0, 9.0005, 100.0}) {
      const auto w = scenarios::frequency_study_weights(qq);
      const Mat h = control::design_ltr_filter(m, qq, w.V10, w.V, w.V2).H;
      auto expected = numerics::eigenvalues(m.A - m.B * K);
      const auto f = numerics::eigenvalues(m.A - h * m.C);
      expected.insert(expected.end(), f.begin(), f.end());
      const double d = numerics::spectrum_distance(numerics::eigenvalues(control::closed_loop_matrix(m, K, h)), expected);
      worst = std::max(worst, d / std::max(1.0, qq));
    }
    note("separation", worst <= kSeparationTol, num(worst, 3));
  }
  // Exact linearization: the transformed state follows the linear chain.
  {
    const auto& c = cdm();
    const Vec zd = control::fl_reference(op.cdm_state);
    const auto g = scenarios::published_nflc_gains();
    auto run = [&](double dt) {
      numerics::OdeProblem p;
      p.rhs = [&](double t, const Vec& s, int) {
        const Vec x = s.head(5);
        const Vec e = control::transform_state(c, x) - zd;
        const double w1 = -g.K_G.dot(e.head(3)) + 0.002 * std::sin(0.7 * t);
        const double w2 = -g.K_T.dot(e.tail(2)) + 0.01 * std::cos(0.4 * t);
        const auto terms = control::fl_terms(c, x);
        Vec u(2);
        u << (w1 - terms.sigma1) / terms.gamma1, (w2 - terms.sigma2) / terms.gamma2;
        const Vec z = s.tail(5);
        Vec d(10);
        d << cdm_rhs(c, x, u, Network::normal, ActuatorLimits{-1e9, 1e9, -1e9, 1e9}), z(1), z(2), w1, z(4), w2;
        return d;
      };
      Vec x0 = op.cdm_state;
      x0(0) *= 1.02;
      x0(2) += 0.05;
      Vec s0(10);
      s0 << x0, control::transform_state(c, x0);
      p.x0 = s0;
      p.t1 = 20.0;
      p.dt = dt;
      return numerics::integrate(p);
    };
    const auto tr = run(0.01), fine = run(0.005);
    double worst = 0.0;
    for (const auto& s : tr.states)
      worst = std::max(worst, (control::transform_state(c, s.head(5)) - s.tail(5)).cwiseAbs().maxCoeff());
    const double tol = std::max((tr.states.back() - fine.states.back()).cwiseAbs().maxCoeff(), 1e-12);
    note("linearization", worst <= 10.0 * tol, num(worst, 3) + "<=10x" + num(tol, 3));
  }
  // Structural Lie-derivative zeros and relative degree.
  {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> eq(0.8, 1.8), w(0.97, 1.03), d(0.1, 3.0), tm(0.5, 1.4), gv(0.5, 1.2);
    double worst = 0.0;
    bool degree = true;
    for (int i = 0; i < 50; ++i) {
      Vec x(5);
      x << eq(rng), w(rng), d(rng), tm(rng), gv(rng);
      worst = std::max({worst, control::lie_input(cdm(), 0, 0, x).cwiseAbs().maxCoeff(),
                        control::lie_input(cdm(), 0, 1, x).cwiseAbs().maxCoeff(),
                        control::lie_input(cdm(), 1, 0, x).cwiseAbs().maxCoeff()});
      const auto rd = control::relative_degree_check(cdm(), x);
      degree = degree && rd.r1 == 3 && rd.r2 == 2;
    }
    note("lie-zeros", worst == 0.0 && degree, num(worst, 3));
  }
  // Analytic Jacobians against central differences.
  {
    double worst = 0.0;
    const double h = 1e-6;
    for (int j = 0; j < 5; ++j) {
      Vec e = Vec::Zero(5);
      e(j) = h;
      const Vec fd = (cdm_rhs(cdm(), op.cdm_state + e, op.u0) - cdm_rhs(cdm(), op.cdm_state - e, op.u0)) / (2 * h);
      worst = std::max(worst, (fd - m.A.col(j)).cwiseAbs().maxCoeff());
    }
    const auto pop = plant_equilibrium(plant(), cdm(), scenarios::plant_loading(OpId::I));
    const Vec& px = *pop.plant_state;
    const Mat jp = plant_jacobian(plant(), px);
    for (int j = 0; j < 9; ++j) {
      Vec e = Vec::Zero(9);
      e(j) = h;
      const Vec fd = (plant_rhs(plant(), px + e, *pop.plant_inputs) - plant_rhs(plant(), px - e, *pop.plant_inputs)) / (2 * h);
      worst = std::max(worst, (fd - jp.col(j)).cwiseAbs().maxCoeff());
    }
    note("jacobians", worst <= kJacobianTol, num(worst, 3));
  }
  // LTR gain direction converges monotonically on a q-ladder.
  {
    double last = std::numeric_limits<double>::infinity();
    bool mono = true;
    std::string trail;
    for (double qq : {10.0, 100.0, 1000.0}) {
      const auto w = scenarios::frequency_study_weights(qq);
      const auto d = control::design_ltr_filter(m, qq, w.V10, w.V, w.V2);
      const double dist = (d.H / qq - control::ideal_filter_gain(m, 1.0, d.V, d.V2)).norm();
      mono = mono && dist <= last;
      last = dist;
      trail += (trail.empty() ? "" : ">") + num(dist, 3);
    }
    note("ltr", mono, trail);
  }
  // RK4 global error ratio under step halving.
  {
    numerics::OdeProblem osc;
    osc.rhs = [](double t, const Vec& x, int) -> Vec {
      Vec d(2);
      d << x(1), -x(0) + 0.1 * std::sin(t);
      return d;
    };
    osc.x0 = Vec::Zero(2);
    osc.x0(0) = 1.0;
    osc.t1 = 5.0;
    auto final_at = [&](double dt) {
      auto p = osc;
      p.dt = dt;
      return numerics::integrate(p).states.back();
    };
    const Vec ref = final_at(1e-4);
    const double ratio = (final_at(0.1) - ref).norm() / (final_at(0.05) - ref).norm();
    note("rk4-order", ratio >= 12.0 && ratio <= 20.0, num(ratio, 4));
  }
  r.detail = os.str();
  return r;
}

const std::map<int, std::pair<std::function<CriterionResult()>, double>>& registry() {
  // Criterion -> (check, runtime budget in seconds).
  static const std::map<int, std::pair<std::function<CriterionResult()>, double>> table = {
      {1, {coefficients, 1.0}}, {2, {operating_points, 5.0}}, {3, {margins, 30.0}},
      {4, {nyquist, 120.0}},    {5, {case1, 120.0}},          {6, {case2, 120.0}},
      {7, {table3, 120.0}},     {8, {properties, 120.0}}};
  return table;
}

}  // namespace

CriterionResult check_criterion(int id) {
  const auto it = registry().find(id);
  if (it == registry().end()) throw InvalidInput("no acceptance criterion " + std::to_string(id));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = it->second.first();
  } catch (const std::exception& e) {
    r.id = id;
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.seconds > it->second.second) {
    r.pass = false;
    r.detail += " [over the " + num(it->second.second) + " s budget]";
  }
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(check_criterion(id));
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << " " << r.id << " " << r.title << " (" << num(r.seconds, 3) << " s) | "
     << r.detail;
  return os.str();
}

}  // namespace smib::io
