#include "smib/control/fl.hpp"
#include "smib/control/lqg.hpp"
#include "smib/errors.hpp"
#include "smib/io/acceptance.hpp"
#include "smib/io/config.hpp"
#include "smib/io/csv.hpp"
#include "smib/io/report.hpp"
#include "smib/model/coefficients.hpp"
#include "smib/model/equilibrium.hpp"
#include "smib/scenarios/presets.hpp"
#include "smib/scenarios/scenario.hpp"
#include "smib/scenarios/studies.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace smib;
using nlohmann::json;
using scenarios::ControllerKind;
using scenarios::ModelKind;
using scenarios::OpId;

namespace {

constexpr int kOk = 0, kUsage = 1, kNumerical = 2, kMismatch = 3;
constexpr const char* kOutEnv = "SMIB_OUT_DIR";

struct UsageError : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct Options {
  std::string config_path;
  std::string out;
  std::string controller;
  std::string q;
  std::string model;
  std::string op;
  int case_id = 0;
  double t_end = 30.0;
  double scale = 0.9;
  bool fault = false;
  bool plant_in_loop = false;
};

std::string g15(double v) { return io::format_number(v); }

io::Config load(const Options& o) { return o.config_path.empty() ? io::Config{} : io::load_config(o.config_path); }

fs::path out_dir(const Options& o, const io::Config& c) {
  fs::path p = c.output_dir;
  if (const char* env = std::getenv(kOutEnv); env && *env) p = env;
  if (!o.out.empty()) p = o.out;
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw InvalidInput("cannot write " + p.string());
  f << text;
}

std::vector<OpId> ops(const Options& o) {
  if (o.op.empty()) return {OpId::I, OpId::II};
  if (o.op == "I" || o.op == "1") return {OpId::I};
  if (o.op == "II" || o.op == "2") return {OpId::II};
  throw UsageError("--op must be I or II");
}

const char* op_name(OpId id) { return id == OpId::I ? "I" : "II"; }

json matrix_json(const Mat& m) {
  json j = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(row);
  }
  return j;
}

std::string matrix_text(const std::string& name, const Mat& m) {
  std::ostringstream os;
  os << name << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << " ";
    for (Eigen::Index k = 0; k < m.cols(); ++k) os << " " << g15(m(i, k));
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- derive
int cmd_derive(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto cc = model::derive_cdm_coefficients(cfg.machine);
  const auto pc = model::derive_plant_coefficients(cfg.machine);
  std::ostringstream os;
  os << "[cdm]\n";
  for (const auto& [k, v] : cc.named_values()) os << k << " = " << g15(v) << "\n";
  os << "\n[plant]\n";
  for (const auto& [k, v] : pc.named_values()) os << k << " = " << g15(v) << "\n";
  write_text(dir / "coefficients.txt", os.str());
  std::cout << os.str();
  return kOk;
}

// ---------------------------------------------------------------- equilibrium
json op_json(const model::OperatingPoint& op) {
  json j;
  j["cdm_state"] = {{"E_q", op.cdm_state(0)}, {"omega", op.cdm_state(1)}, {"delta", op.cdm_state(2)},
                    {"T_m", op.cdm_state(3)}, {"G_V", op.cdm_state(4)}};
  j["V_t"] = op.V_t0;
  j["V_d"] = op.V_d0;
  j["V_q"] = op.V_q0;
  j["P"] = op.P;
  if (op.power_factor) j["power_factor"] = *op.power_factor;
  if (op.plant_state) {
    const Vec& x = *op.plant_state;
    j["plant_state"] = {{"I_d", x(0)}, {"I_F", x(1)}, {"I_D", x(2)}, {"I_q", x(3)},  {"I_Q", x(4)},
                        {"omega", x(5)}, {"delta", x(6)}, {"T_m", x(7)}, {"G_V", x(8)}};
    j["inputs"] = {{"V_F", (*op.plant_inputs)(0)}, {"u_T", (*op.plant_inputs)(1)}};
    if (op.stator_current) j["stator_current"] = *op.stator_current;
  } else {
    j["inputs"] = {{"E_FD", op.u0(0)}, {"u_T", op.u0(1)}};
  }
  return j;
}

model::OperatingPoint operating_point(const io::Config& cfg, OpId id, ModelKind m) {
  const auto cc = model::derive_cdm_coefficients(cfg.machine);
  if (m == ModelKind::cdm) return model::find_equilibrium(cc, scenarios::cdm_loading(id), scenarios::cdm_guess(id));
  return model::plant_equilibrium(model::derive_plant_coefficients(cfg.machine), cc, scenarios::plant_loading(id));
}

std::vector<ModelKind> models(const Options& o) {
  if (o.model.empty()) return {ModelKind::cdm, ModelKind::plant};
  return {scenarios::parse_model(o.model)};
}

int cmd_equilibrium(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  json j;
  for (auto m : models(o))
    for (auto id : ops(o)) j[scenarios::to_string(m)][op_name(id)] = op_json(operating_point(cfg, id, m));
  write_text(dir / "equilibrium.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- linearize
int cmd_linearize(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  json j;
  for (auto m : models(o))
    for (auto id : ops(o)) {
      const auto op = operating_point(cfg, id, m);
      const auto lin = m == ModelKind::cdm
                           ? model::linearize_cdm(model::derive_cdm_coefficients(cfg.machine), op)
                           : model::linearize_plant(model::derive_plant_coefficients(cfg.machine), op);
      auto& e = j[scenarios::to_string(m)][op_name(id)];
      e = {{"A", matrix_json(lin.A)}, {"B", matrix_json(lin.B)}, {"C", matrix_json(lin.C)}, {"D", matrix_json(lin.D)}};
      std::cout << scenarios::to_string(m) << " operating point " << op_name(id) << "\n"
                << matrix_text("A", lin.A) << matrix_text("B", lin.B) << matrix_text("C", lin.C)
                << matrix_text("D", lin.D) << "\n";
    }
  write_text(dir / "linearization.json", j.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- design
std::optional<double> parse_q(const std::string& s, bool& ideal) {
  ideal = false;
  if (s.empty()) return std::nullopt;
  if (s == "ideal") {
    ideal = true;
    return std::nullopt;
  }
  try {
    std::size_t used = 0;
    const double q = std::stod(s, &used);
    if (used != s.size() || !(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument(s);
    return q;
  } catch (const std::exception&) {
    throw UsageError("--q must be a non-negative number or 'ideal'");
  }
}

int cmd_design(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto& g = cfg.cdm_gains;
  const std::vector<ControllerKind> kinds =
      o.controller.empty() ? std::vector<ControllerKind>{ControllerKind::nflc, ControllerKind::inflc, ControllerKind::lqg}
                           : std::vector<ControllerKind>{scenarios::parse_controller(o.controller)};
  json j;
  for (auto k : kinds) {
    switch (k) {
      case ControllerKind::nflc:
      case ControllerKind::inflc: {
        const auto& f = k == ControllerKind::nflc ? g.nflc : g.inflc;
        const auto [cg, ct] = control::fl_closed_subsystems(f);
        j[scenarios::to_string(k)] = {{"K_G", matrix_json(f.K_G)}, {"K_iG", f.K_iG}, {"K_T", matrix_json(f.K_T)},
                                      {"K_iT", f.K_iT}, {"closed_G", matrix_json(cg)}, {"closed_T", matrix_json(ct)}};
        std::cout << scenarios::to_string(k) << "\n" << matrix_text("K_G", f.K_G) << "K_iG = " << g15(f.K_iG) << "\n"
                  << matrix_text("K_T", f.K_T) << "K_iT = " << g15(f.K_iT) << "\n\n";
        break;
      }
      case ControllerKind::lqg:
      case ControllerKind::lqr: {
        const auto cc = model::derive_cdm_coefficients(cfg.machine);
        const auto lin = model::linearize_cdm(cc, operating_point(cfg, OpId::I, ModelKind::cdm));
        bool ideal = false;
        const auto q = parse_q(o.q, ideal);
        const double qq = q.value_or(ideal ? cfg.freq.ideal_q : g.ltr.q);
        const auto w = q || ideal ? scenarios::frequency_study_weights(qq) : g.ltr;
        const auto d = control::design_ltr_filter(lin, qq, w.V10, w.V, w.V2);
        const Mat h = ideal ? control::ideal_filter_gain(lin, qq, w.V, w.V2) : d.H;
        json zeros = json::array();
        for (const auto& z : d.zeros) zeros.push_back({z.real(), z.imag()});
        j[scenarios::to_string(k)] = {{"K", matrix_json(k == ControllerKind::lqg ? g.lqg_K : g.lqr_K)},
                                      {"q", qq},
                                      {"ideal", ideal},
                                      {"H", matrix_json(h)},
                                      {"transmission_zeros", zeros},
                                      {"minimum_phase", d.minimum_phase},
                                      {"zero_on_axis", d.zero_on_axis}};
        std::cout << scenarios::to_string(k) << " (q = " << g15(qq) << (ideal ? ", ideal" : "") << ")\n"
                  << matrix_text("K", k == ControllerKind::lqg ? g.lqg_K : g.lqr_K) << matrix_text("H", h)
                  << "zero on the imaginary axis: " << (d.zero_on_axis ? "yes" : "no") << "\n\n";
        break;
      }
    }
  }
  write_text(dir / "design.json", j.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- runs
io::CaseSummary summarize(const scenarios::RunResult& r, const std::string& trace_file) {
  io::CaseSummary s;
  s.case_id = r.scenario.case_id;
  s.controller = scenarios::to_string(r.scenario.controller);
  s.model = scenarios::to_string(r.scenario.model);
  s.diverged = r.diverged;
  s.divergence_time = r.divergence_time;
  s.metrics = r.metrics;
  s.trace_file = trace_file;
  return s;
}

io::CaseSummary run_and_write(const io::Config& cfg, const scenarios::Scenario& sc, const fs::path& dir,
                              const std::string& stem) {
  const auto r = scenarios::run_case(sc, cfg.machine);
  const std::string file = stem + ".csv";
  io::write_csv_file((dir / file).string(), io::trace_table(r.trace, r.reference));
  auto s = summarize(r, file);
  write_text(dir / (stem + "_metrics.json"), io::metrics_json(s) + "\n");
  return s;
}

int cmd_simulate(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto kind = scenarios::parse_controller(o.controller.empty() ? "nflc" : o.controller);
  const auto m = scenarios::parse_model(o.model.empty() ? "cdm" : o.model);
  const auto op = ops(o);
  if (op.size() != 1 && !o.op.empty()) throw UsageError("--op must name one operating point");
  const OpId id = o.op.empty() ? OpId::I : op.front();
  if (!(o.t_end > 0.0) || !(o.scale > 0.0)) throw UsageError("--t-end and --scale must be positive");
  // Base the run on the matching standard case, then apply the flags.
  const int base = m == ModelKind::plant ? (id == OpId::I ? 4 : 5) : (o.fault ? 2 : 1);
  if (kind == ControllerKind::lqr && m != ModelKind::plant) throw UsageError("the LQR baseline runs on the plant only");
  auto sc = cfg.scenario(base, kind);
  sc.op = id;
  sc.t_end = o.t_end;
  sc.fault.reset();
  sc.metrics_from = 0.0;
  if (o.fault) {
    if (o.t_end <= 1.2) throw UsageError("--fault needs --t-end above 1.2");
    const double start = std::min(50.0, 0.5 * o.t_end);
    sc.fault = scenarios::FaultWindow{start, start + 0.2};
    sc.metrics_from = start;
  }
  if (m == ModelKind::cdm) sc.initial_scale = o.scale;
  const std::string stem = "simulate_" + scenarios::to_string(kind) + "_" + scenarios::to_string(m) + "_op" + op_name(id);
  const auto s = run_and_write(cfg, sc, dir, stem);
  std::cout << io::metrics_text(s);
  return s.diverged ? kNumerical : kOk;
}

std::vector<ControllerKind> case_controllers(int id, const std::string& flag) {
  if (!flag.empty()) {
    const auto k = scenarios::parse_controller(flag);
    if (k == ControllerKind::lqr && id < 4) throw UsageError("the LQR baseline runs only in cases 4 and 5");
    return {k};
  }
  std::vector<ControllerKind> ks{ControllerKind::nflc, ControllerKind::inflc, ControllerKind::lqg};
  if (id >= 4) ks.push_back(ControllerKind::lqr);
  return ks;
}

int cmd_case(const Options& o) {
  if (o.case_id < 1 || o.case_id > 5) throw UsageError("case id must be 1-5");
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const ModelKind expected = o.case_id >= 4 ? ModelKind::plant : ModelKind::cdm;
  if (!o.model.empty() && scenarios::parse_model(o.model) != expected)
    throw UsageError("case " + std::to_string(o.case_id) + " runs on the " + scenarios::to_string(expected) + " model");
  bool diverged = false;
  for (auto k : case_controllers(o.case_id, o.controller)) {
    const auto s = run_and_write(cfg, cfg.scenario(o.case_id, k), dir,
                                 "case" + std::to_string(o.case_id) + "_" + scenarios::to_string(k));
    std::cout << io::metrics_text(s) << "\n";
    diverged = diverged || s.diverged;
  }
  return diverged ? kNumerical : kOk;
}

// ---------------------------------------------------------------- frequency
std::vector<scenarios::StudyLoop> selected_loops(const Options& o, const io::Config& cfg) {
  bool ideal = false;
  const auto q = parse_q(o.q, ideal);
  if (ideal) return {{"ideal", cfg.freq.ideal_q, true}};
  if (q) {
    std::ostringstream os;
    os << *q;
    return {{os.str(), *q, false}};
  }
  return scenarios::study_loops(cfg.freq);
}

int cmd_freq(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto grid = freq::log_grid(cfg.freq.w_min, cfg.freq.w_max, cfg.freq.points);
  const auto ngrid = freq::nyquist_grid(cfg.freq.nyquist_w_min, cfg.freq.w_max, cfg.freq.nyquist_points);
  for (const auto& row : selected_loops(o, cfg)) {
    const auto loop = scenarios::make_study_loop(row, o.plant_in_loop, cfg.machine);
    const auto r = freq::loop_response(loop, grid);
    const std::string tag = "q" + row.label + (o.plant_in_loop ? "_plant" : "");
    io::write_csv_file((dir / ("bode_loop_" + tag + ".csv")).string(), io::frequency_table(grid, r.loop, "L"));
    io::write_csv_file((dir / ("bode_plant_" + tag + ".csv")).string(), io::frequency_table(grid, r.plant, "N"));
    io::write_csv_file((dir / ("bode_controller_" + tag + ".csv")).string(),
                       io::frequency_table(grid, r.controller, "K"));
    const auto nr = freq::loop_response(loop, ngrid);
    io::write_csv_file((dir / ("nyquist_" + tag + ".csv")).string(), io::frequency_table(ngrid, nr.loop, "L"));
    std::cout << "q = " << row.label << ": wrote bode_*_" << tag << ".csv and nyquist_" << tag << ".csv ("
              << freq::to_string(r.kernel) << " kernel)\n";
  }
  return kOk;
}

int cmd_margins(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  auto study = cfg.freq;
  bool ideal = false;
  const auto q = parse_q(o.q, ideal);
  if (ideal) study.q_ladder.clear();
  if (q) {
    study.q_ladder = {*q};
    study.ideal = false;
  }
  io::RunReport rep;
  rep.config_hash = io::config_hash(cfg);
  rep.margins = scenarios::margin_table(study, cfg.machine);
  const auto nyq = scenarios::nyquist_table(study, o.plant_in_loop, cfg.machine);
  json j = json::parse(rep.to_json());
  for (std::size_t i = 0; i < nyq.size(); ++i)
    j["nyquist"].push_back({{"q", nyq[i].loop.label},
                            {"plant_in_loop", nyq[i].plant_in_loop},
                            {"clockwise_det", nyq[i].det.clockwise},
                            {"clockwise_H11", nyq[i].h11.clockwise},
                            {"clockwise_H22", nyq[i].h22.clockwise},
                            {"open_loop_unstable", nyq[i].open_loop_unstable},
                            {"max_real_eig", nyq[i].max_real_eig}});
  write_text(dir / "margins.json", j.dump(2) + "\n");
  std::cout << rep.to_text();
  for (const auto& n : nyq)
    std::cout << "q = " << n.loop.label << ": N(det) = " << n.det.clockwise << ", P = " << n.open_loop_unstable
              << ", max Re = " << g15(n.max_real_eig) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- report
int cmd_report(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  struct Job {
    int id;
    ControllerKind k;
  };
  std::vector<Job> jobs;
  for (int id = 1; id <= 5; ++id)
    for (auto k : case_controllers(id, "")) jobs.push_back({id, k});

  std::vector<std::future<io::CaseSummary>> futures;
  for (const auto& j : jobs)
    futures.push_back(std::async(std::launch::async, [&cfg, &dir, j] {
      return run_and_write(cfg, cfg.scenario(j.id, j.k), dir,
                           "case" + std::to_string(j.id) + "_" + scenarios::to_string(j.k));
    }));

  io::RunReport rep;
  rep.config_hash = io::config_hash(cfg);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto s = futures[i].get();
    // Regenerate the metrics from the written trace.
    if (!s.diverged) {
      const auto sc = cfg.scenario(jobs[i].id, jobs[i].k);
      s.metrics = io::metrics_from_table(io::read_csv_file((dir / s.trace_file).string()), sc.metrics_from, sc.limits);
    }
    rep.cases.push_back(std::move(s));
  }
  rep.margins = scenarios::margin_table(cfg.freq, cfg.machine);
  rep.criteria = io::run_acceptance();
  write_text(dir / "report.json", rep.to_json() + "\n");
  write_text(dir / "report.txt", rep.to_text());
  std::cout << rep.to_text();
  return rep.all_pass() ? kOk : kMismatch;
}

void fail_line(const char* kind, const std::string& msg) {
  std::string m = msg;
  for (char& c : m)
    if (c == '\n') c = ' ';
  std::cerr << "smibctl: error kind=" << kind << " message=\"" << m << "\"" << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-machine infinite-bus control experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "Sectioned config file (defaults when omitted)")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, std::string("Output directory (overrides $") + kOutEnv + " and the config)");

  auto add_model = [&](CLI::App* c) { c->add_option("--model", o.model, "cdm or plant"); };
  auto add_op = [&](CLI::App* c) { c->add_option("--op", o.op, "Operating point I or II"); };
  auto add_ctrl = [&](CLI::App* c) { c->add_option("--controller", o.controller, "nflc, inflc, lqg or lqr"); };
  auto add_q = [&](CLI::App* c) { c->add_option("--q", o.q, "Recovery parameter q, or 'ideal'"); };

  int code = kOk;
  auto* derive = app.add_subcommand("derive", "Dump model coefficients");
  derive->callback([&] { code = cmd_derive(o); });

  auto* eq = app.add_subcommand("equilibrium", "Operating points");
  add_model(eq);
  add_op(eq);
  eq->callback([&] { code = cmd_equilibrium(o); });

  auto* lin = app.add_subcommand("linearize", "Small-signal models");
  add_model(lin);
  add_op(lin);
  lin->callback([&] { code = cmd_linearize(o); });

  auto* design = app.add_subcommand("design", "Controller gains");
  add_ctrl(design);
  add_q(design);
  design->callback([&] { code = cmd_design(o); });

  auto* sim = app.add_subcommand("simulate", "Free-form run from a perturbed start");
  add_ctrl(sim);
  add_model(sim);
  add_op(sim);
  sim->add_option("--t-end", o.t_end, "Run length in seconds");
  sim->add_option("--scale", o.scale, "Initial-state scale on the reduced model");
  sim->add_flag("--fault", o.fault, "Terminal short circuit of 0.2 s");
  sim->callback([&] { code = cmd_simulate(o); });

  auto* fr = app.add_subcommand("freq", "Bode and Nyquist data of the loop study");
  add_q(fr);
  fr->add_flag("--plant-in-loop", o.plant_in_loop, "Use the nine-state linearization inside the loop");
  fr->callback([&] { code = cmd_freq(o); });

  auto* mg = app.add_subcommand("margins", "Gain/phase margins and Nyquist counts");
  add_q(mg);
  mg->add_flag("--plant-in-loop", o.plant_in_loop, "Nyquist counts with the nine-state plant in the loop");
  mg->callback([&] { code = cmd_margins(o); });

  auto* cs = app.add_subcommand("case", "Standard case study");
  cs->add_option("id", o.case_id, "Case 1-5")->required()->check(CLI::Range(1, 5));
  add_ctrl(cs);
  add_model(cs);
  cs->callback([&] { code = cmd_case(o); });

  auto* rp = app.add_subcommand("report", "All cases, margins and acceptance verdicts");
  rp->callback([&] { code = cmd_report(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line("usage", e.what());
    return kUsage;
  } catch (const NumericalError& e) {
    fail_line("numerical", e.what());
    return kNumerical;
  } catch (const InvalidInput& e) {
    fail_line("usage", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fail_line("numerical", e.what());
    return kNumerical;
  }
  return code;
}
