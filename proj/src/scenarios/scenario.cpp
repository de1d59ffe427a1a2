#include "smib/scenarios/scenario.hpp"

#include "smib/control/lqg.hpp"
#include "smib/errors.hpp"
#include "smib/model/cdm.hpp"
#include "smib/model/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smib::scenarios {

using namespace smib::model;

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::nflc: return "nflc";
    case ControllerKind::inflc: return "inflc";
    case ControllerKind::lqg: return "lqg";
    case ControllerKind::lqr: return "lqr";
  }
  return "?";
}

std::string to_string(ModelKind m) { return m == ModelKind::cdm ? "cdm" : "plant"; }

ControllerKind parse_controller(const std::string& s) {
  if (s == "nflc") return ControllerKind::nflc;
  if (s == "inflc") return ControllerKind::inflc;
  if (s == "lqg" || s == "lqg-ltr" || s == "lqg_ltr") return ControllerKind::lqg;
  if (s == "lqr") return ControllerKind::lqr;
  throw InvalidInput("unknown controller '" + s + "' (expected nflc, inflc, lqg, lqr)");
}

ModelKind parse_model(const std::string& s) {
  if (s == "cdm") return ModelKind::cdm;
  if (s == "plant") return ModelKind::plant;
  throw InvalidInput("unknown model '" + s + "' (expected cdm, plant)");
}

double pm_schedule(double t) {
  if (!(t >= 0.0) || t > 100.0) throw InvalidInput("pm_schedule: t must lie in [0, 100]");
  if (t < 25.0) return 1.0;
  if (t < 50.0) return 1.1;
  if (t < 75.0) return 1.0;
  return 0.9;
}

ControllerSettings plant_settings() {
  ControllerSettings g;
  g.nflc = published_nflc_gains();
  g.inflc = published_inflc_gains();
  g.lqg_K = published_lqg_gain();
  g.ltr = published_ltr_weights();
  g.lqr_K = published_lqg_gain();
  return g;
}

ControllerSettings cdm_settings() {
  ControllerSettings g;
  // One rule for both linearizing controllers: identity-weight LQR on the
  // decoupled subsystems. The LQG keeps its published state gain.
  g.nflc = control::design_fl_gains(Mat::Identity(3, 3), 1.0, Mat::Identity(2, 2), 1.0, false);
  g.inflc = control::design_fl_gains(Mat::Identity(4, 4), 1.0, Mat::Identity(3, 3), 1.0, true);
  g.lqg_K = published_lqg_gain();
  g.ltr = frequency_study_weights(kFrequencyStudyQ);
  g.lqr_K = published_lqg_gain();
  return g;
}

Scenario make_case(int case_id, ControllerKind controller) {
  if (case_id < 1 || case_id > 5) throw InvalidInput("case id must be 1-5");
  Scenario s;
  s.case_id = case_id;
  s.controller = controller;
  const bool plant = case_id >= 4;
  if (!plant && controller == ControllerKind::lqr)
    throw InvalidInput("the full-state LQR baseline is only defined for cases 4 and 5");
  s.model = plant ? ModelKind::plant : ModelKind::cdm;
  s.op = case_id == 5 ? OpId::II : OpId::I;
  s.gains = plant ? plant_settings() : cdm_settings();
  if (plant) s.reference = ReferenceSource::published;
  // The loaded operating point needs G_V = T_m = 1.349, above the 1.2 gate
  // limit, so the limit would make the equilibrium unreachable.
  if (case_id == 5) s.limits.gv_max = std::numeric_limits<double>::infinity();
  switch (case_id) {
    case 1: s.initial_scale = 0.9; break;
    case 2:
      s.fault = FaultWindow{};
      s.metrics_from = 50.0;
      break;
    case 3: s.power_schedule = true; break;
    default: break;
  }
  return s;
}

ChannelMetrics channel_metrics(const std::vector<double>& t, const std::vector<double>& y, double reference,
                               double from) {
  if (t.size() != y.size() || t.empty()) throw InvalidInput("channel_metrics: empty or mismatched trace");
  ChannelMetrics m;
  const double t_last = t.back();
  const double window_start = t_last - 0.1 * (t_last - t.front());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= window_start) {
      sum += y[i];
      ++count;
    }
  }
  m.final_mean = sum / double(count);
  m.steady_state_error = std::abs(m.final_mean - reference);

  const std::size_t first = std::lower_bound(t.begin(), t.end(), from) - t.begin();
  if (first >= t.size()) return m;
  const double step = reference - y[first];
  double peak_ref = 0.0, peak_final = 0.0, beyond = 0.0;
  for (std::size_t i = first; i < t.size(); ++i) {
    peak_ref = std::max(peak_ref, std::abs(y[i] - reference));
    peak_final = std::max(peak_final, std::abs(y[i] - m.final_mean));
    if (step != 0.0) beyond = std::max(beyond, (y[i] - reference) * (step > 0.0 ? 1.0 : -1.0));
  }
  if (std::abs(step) > 1e-6 * std::max(1.0, std::abs(reference)))
    m.overshoot_pct = 100.0 * beyond / std::abs(step);
  else
    m.overshoot_pct = 100.0 * peak_ref / std::max(std::abs(reference), 1e-12);

  const double band = 0.02 * peak_final;
  std::optional<std::size_t> last_out;
  for (std::size_t i = first; i < t.size(); ++i)
    if (std::abs(y[i] - m.final_mean) > band) last_out = i;
  if (!last_out)
    m.settling_time = t[first];
  else if (*last_out + 1 < t.size())
    m.settling_time = t[*last_out + 1];
  return m;
}

Vec bridge_plant_state(const CdmCoefficients& c, const Vec& px) {
  Vec x(5);
  x << control::reconstruct_eq_prime_b(c, px(plant_index::I_F), px(plant_index::I_d)), px(plant_index::omega),
      px(plant_index::delta), px(plant_index::T_m), px(plant_index::G_V);
  return x;
}

namespace {

struct Segment {
  Network net = Network::normal;
  double pm = 1.0;
};

struct Sample {
  Vec u;          // applied [E_FD, u_T]
  Vec model_rate;
  Vec ctrl_rate;
  Vec cdm_view;   // CDM state seen by the controller
  double V_t = 0.0;
  bool singular = false;
};

}  // namespace

RunResult run_case(const Scenario& s, const MachineParams& params) {
  if (!(s.dt > 0.0) || !(s.t_end > s.dt)) throw InvalidInput("run_case: need 0 < dt < t_end");
  if (s.power_schedule && (s.t_end > 100.0 || s.model != ModelKind::cdm))
    throw InvalidInput("run_case: the power schedule is defined on the reduced model over [0, 100] s");
  if (s.fault && !(s.fault->start > 0.0 && s.fault->end > s.fault->start && s.fault->end < s.t_end))
    throw InvalidInput("run_case: fault window must lie inside the run");
  if (s.controller == ControllerKind::lqr && s.model != ModelKind::plant)
    throw InvalidInput("run_case: the full-state LQR baseline runs on the plant only");

  const auto cc = derive_cdm_coefficients(params);
  const auto pc = derive_plant_coefficients(params);
  const bool on_plant = s.model == ModelKind::plant;

  // Controller setpoints come from the reduced model at the scenario loading.
  const OperatingPoint ref_op = s.reference == ReferenceSource::published
                                    ? published_reference(s.op, cc)
                                    : find_equilibrium(cc, cdm_loading(s.op), cdm_guess(s.op));
  const OperatingPoint op_one = find_equilibrium(cc, cdm_loading(OpId::I), cdm_guess(OpId::I));
  LinearModel design = linearize_cdm(cc, op_one);
  const Vec z_d = control::fl_reference(ref_op.cdm_state);

  std::optional<control::LqgController> lqg;
  if (s.controller == ControllerKind::lqg) {
    const Mat h = control::design_ltr_filter(design, s.gains.ltr.q, s.gains.ltr.V10, s.gains.ltr.V, s.gains.ltr.V2).H;
    LinearModel shifted = design;
    shifted.op = ref_op;  // OP I dynamics, scenario setpoints
    lqg.emplace(shifted, s.gains.lqg_K, h, s.limits);
  }

  std::optional<OperatingPoint> plant_op;
  Vec x0;
  if (on_plant) {
    plant_op = plant_equilibrium(pc, cc, plant_loading(s.op));
    x0 = *plant_op->plant_state;
  } else {
    x0 = ref_op.cdm_state;
    for (int i : {cdm_index::E_q, cdm_index::delta, cdm_index::T_m, cdm_index::G_V}) x0(i) *= s.initial_scale;
  }
  const int nx = int(x0.size());
  const int nc = s.controller == ControllerKind::inflc ? 2 : (s.controller == ControllerKind::lqg ? 5 : 0);
  const int tm_index = on_plant ? plant_index::T_m : cdm_index::T_m;
  const int gv_index = on_plant ? plant_index::G_V : cdm_index::G_V;

  // Event segments.
  std::vector<Segment> segments{{Network::normal, s.power_schedule ? pm_schedule(0.0) : 1.0}};
  std::vector<numerics::OdeEvent> events;
  if (s.fault) {
    segments.push_back({Network::faulted, 1.0});
    events.push_back({s.fault->start, 1});
    segments.push_back({Network::normal, 1.0});
    events.push_back({s.fault->end, 2});
  }
  if (s.power_schedule) {
    for (double t : {25.0, 50.0, 75.0}) {
      segments.push_back({Network::normal, pm_schedule(t)});
      events.push_back({t, int(segments.size()) - 1});
    }
  }

  control::FlOptions fl_opts;
  fl_opts.pinned_torque = s.power_schedule;
  fl_opts.limits = s.limits;

  auto evaluate = [&](const Vec& aug, const Segment& seg) {
    Sample out;
    Vec x = aug.head(nx);
    if (s.power_schedule) x(tm_index) = seg.pm;
    out.cdm_view = on_plant ? bridge_plant_state(cc, x) : x;

    // Measured terminal voltage for the output-feedback controller uses the
    // previous control only through the plant state, so it is available first.
    auto terminal = [&](const Vec& u) {
      if (seg.net == Network::faulted) return 0.0;
      if (!on_plant) return cdm_outputs(cc, x).V_t;
      Vec up = u;
      up(0) = control::efd_to_vf(cc, u(0));
      return plant_outputs(pc, x, up).V_t;
    };

    switch (s.controller) {
      case ControllerKind::nflc:
      case ControllerKind::inflc: {
        const auto& gains = s.controller == ControllerKind::nflc ? s.gains.nflc : s.gains.inflc;
        Eigen::Vector2d ints = Eigen::Vector2d::Zero();
        if (nc == 2) ints = aug.segment(nx, 2);
        const auto fo = s.controller == ControllerKind::nflc
                            ? control::nflc_control(cc, gains, z_d, out.cdm_view, fl_opts)
                            : control::fl_control(cc, gains, z_d, out.cdm_view, ints, fl_opts);
        out.singular = fo.singular;
        out.u = fo.singular ? control::clamp_inputs(ref_op.u0, s.limits) : fo.u;
        if (nc == 2) {
          out.ctrl_rate = fo.singular ? Vec(Vec::Zero(2)) : Vec(control::fl_integral_rate(cc, z_d, out.cdm_view, fo));
        }
        break;
      }
      case ControllerKind::lqg: {
        const Vec xhat = aug.segment(nx, 5);
        out.u = lqg->control(xhat);
        Vec y(2);
        y << terminal(out.u), x(on_plant ? plant_index::omega : cdm_index::omega);
        out.ctrl_rate = lqg->estimator_rate(xhat, y, out.u);
        break;
      }
      case ControllerKind::lqr:
        out.u = control::full_state_lqr_control(s.gains.lqr_K, out.cdm_view, ref_op.cdm_state, ref_op.u0, s.limits);
        break;
    }
    out.V_t = terminal(out.u);

    if (on_plant) {
      Vec up = out.u;
      up(0) = control::efd_to_vf(cc, out.u(0));
      out.model_rate = plant_rhs(pc, x, up, seg.net, s.limits);
    } else {
      out.model_rate = cdm_rhs(cc, x, out.u, seg.net, s.limits);
    }
    if (s.power_schedule) out.model_rate(tm_index) = 0.0;
    return out;
  };

  Vec aug(nx + nc);
  aug.head(nx) = x0;
  if (nc > 0) aug.tail(nc).setZero();

  RunResult result;
  result.scenario = s;
  numerics::OdeProblem prob;
  prob.x0 = aug;
  prob.t1 = s.t_end;
  prob.dt = s.dt;
  prob.events = events;
  prob.partial_on_divergence = true;
  prob.rhs = [&](double, const Vec& a, int mode) {
    const Sample sm = evaluate(a, segments[mode]);
    Vec rate(nx + nc);
    rate.head(nx) = sm.model_rate;
    if (nc > 0) rate.tail(nc) = sm.ctrl_rate;
    return rate;
  };
  prob.post_step = [&](double, Vec& a, int mode) {
    a(gv_index) = std::clamp(a(gv_index), s.limits.gv_min, s.limits.gv_max);
    if (s.power_schedule) a(tm_index) = segments[mode].pm;
  };
  prob.observer = [&](double t, const Vec& a, int mode) {
    // Samples on the closed fault window report the faulted network.
    Segment seg = segments[mode];
    if (s.fault && t >= s.fault->start && t <= s.fault->end) seg.net = Network::faulted;
    const Sample sm = evaluate(a, seg);
    result.singular_events += sm.singular;
    auto& tr = result.trace;
    const Vec x = a.head(nx);
    tr.append_channel("V_t", sm.V_t);
    tr.append_channel("omega", x(on_plant ? plant_index::omega : cdm_index::omega));
    tr.append_channel("delta", x(on_plant ? plant_index::delta : cdm_index::delta));
    tr.append_channel("T_m", x(tm_index));
    tr.append_channel("G_V", x(gv_index));
    tr.append_channel("E_q", sm.cdm_view(cdm_index::E_q));
    tr.append_channel("E_FD", sm.u(0));
    tr.append_channel("V_F", control::efd_to_vf(cc, sm.u(0)));
    tr.append_channel("u_T", sm.u(1));
  };

  auto trace = numerics::integrate(prob);
  // Channels were written into result.trace by the observer; merge.
  trace.channels = std::move(result.trace.channels);
  result.trace = std::move(trace);
  result.diverged = result.trace.diverged;
  result.divergence_time = result.trace.divergence_time;

  // References: reduced-model equilibrium for reduced-model runs; the published
  // desired values (plant equilibrium) for plant runs.
  auto& ref = result.reference;
  if (on_plant) {
    const Vec& px = *plant_op->plant_state;
    ref["V_t"] = plant_op->V_t0;
    ref["omega"] = 1.0;
    ref["delta"] = px(plant_index::delta);
    ref["T_m"] = px(plant_index::T_m);
    ref["E_FD"] = control::vf_to_efd(cc, (*plant_op->plant_inputs)(0));
    ref["u_T"] = (*plant_op->plant_inputs)(1);
  } else {
    ref["V_t"] = ref_op.V_t0;
    ref["omega"] = 1.0;
    ref["delta"] = ref_op.cdm_state(cdm_index::delta);
    ref["T_m"] = ref_op.cdm_state(cdm_index::T_m);
    ref["E_FD"] = ref_op.u0(0);
    ref["u_T"] = ref_op.u0(1);
  }

  if (!result.diverged) {
    const auto& t = result.trace.times;
    for (const auto& [name, r] : ref)
      result.metrics.channels[name] = channel_metrics(t, result.trace.channel(name), r, s.metrics_from);
    const auto& efd = result.trace.channel("E_FD");
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      if (efd[i] >= s.limits.efd_max - 1e-12 || efd[i] <= s.limits.efd_min + 1e-12)
        result.metrics.saturation_duration += t[i + 1] - t[i];
  }
  return result;
}

}  // namespace smib::scenarios
