#include "smib/errors.hpp"
#include "smib/io/config.hpp"
#include "smib/io/csv.hpp"
#include "smib/io/report.hpp"
#include "smib/scenarios/presets.hpp"

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace smib;
using namespace smib::io;
using Catch::Approx;

TEST_CASE("empty config gives the published parameter set", "[io][config]") {
  const Config c = parse_config("");
  CHECK(c.machine.L_d == 1.70);
  CHECK(c.machine.tau_G == 0.2);
  CHECK(c.machine.H == 2.37);
  CHECK(c.machine.R_e == 0.02);
  CHECK(c.machine.L_e == 0.4);
  CHECK(c.machine.r_F == 0.000742);
  CHECK(*c.machine.transient_inductance == 0.245);
  CHECK(c.limits.efd_max == 5.0);
  CHECK(c.limits.gv_max == 1.2);
  CHECK(c.plant_gains.lqg_K(0, 0) == 87.3944);
  CHECK(c.plant_gains.ltr.q == 5.25);
  CHECK(c.freq.q_ladder == std::vector<double>{0.0, 9.0005, 100.0});
  CHECK(c.output_dir == "out");
  CHECK(parse_config("# only a comment\n\n").machine.L_F == 1.65);
}

TEST_CASE("serialize then parse is the identity", "[io][config]") {
  Config c;
  c.machine.H = 0.1 + 0.2;  // not representable in short decimal form
  c.machine.transient_inductance.reset();
  c.machine.cdm_neglect_stator_resistance = false;
  c.limits.efd_min = -4.75;
  c.cdm_gains.lqg_K(1, 3) = 1.0 / 3.0;
  c.freq.q_ladder = {0.5, 2.0};
  c.freq.ideal = false;
  c.cases[2].t_end = 60.0;
  c.output_dir = "results/run 1";
  const std::string text = serialize_config(c);
  const Config back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.machine.H == c.machine.H);
  CHECK_FALSE(back.machine.transient_inductance.has_value());
  CHECK(back.cdm_gains.lqg_K(1, 3) == 1.0 / 3.0);
  CHECK(*back.cases.at(2).t_end == 60.0);
  CHECK(back.output_dir == "results/run 1");
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(Config{}) != config_hash(c));
  CHECK(serialize_config(parse_config(serialize_config(Config{}))) == serialize_config(Config{}));
}

TEST_CASE("invalid configs are rejected with a location", "[io][config]") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK_THROWS_WITH(parse_config("[machine]\nH = -1\n"), Catch::Matchers::ContainsSubstring("H"));
  CHECK_THROWS_AS(parse_config("[machine]\nH = -1\n"), ConfigError);
  CHECK(line_of("[machine]\nL_d = 1.7\nfoo = 1\n") == 3);
  CHECK(line_of("[nowhere]\n") == 1);
  CHECK(line_of("H = 2\n") == 1);
  CHECK(line_of("[machine]\nH = 2\nH = 3\n") == 3);
  CHECK(line_of("[machine]\nH = nan\n") == 2);
  CHECK(line_of("[machine]\nH = inf\n") == 2);
  CHECK(line_of("[machine]\nH = 2x\n") == 2);
  CHECK(line_of("[machine]\nH\n") == 2);
  CHECK(line_of("[controller.cdm]\nlqg.K = 1, 2, 3\n") == 2);
  CHECK(line_of("[controller.cdm]\nnflc.K_G = 1, 2\n") == 2);
  CHECK(line_of("[freq]\nw_min = 10\nw_max = 1\n") == 0);
  CHECK(line_of("[limits]\nefd_min = 6\n") == 0);
  CHECK(line_of("[scenario.2]\ndt = 0\n") == 0);
  CHECK(line_of("[machine]\nneglect_stator_resistance = maybe\n") == 2);
  CHECK_THROWS_AS(load_config("/nonexistent/smib.ini"), InvalidInput);
}

TEST_CASE("config values reach the scenarios", "[io][config]") {
  Config c = parse_config("[scenario.1]\nt_end = 5\ninitial_scale = 0.95\n[limits]\nefd_max = 4\n");
  const auto s = c.scenario(1, scenarios::ControllerKind::nflc);
  CHECK(s.t_end == 5.0);
  CHECK(s.initial_scale == 0.95);
  CHECK(s.limits.efd_max == 4.0);
  CHECK(std::isinf(c.scenario(5, scenarios::ControllerKind::lqr).limits.gv_max));
  CHECK(c.scenario(4, scenarios::ControllerKind::lqg).gains.ltr.q == 5.25);
}

TEST_CASE("numbers print with 15 significant digits and read back", "[io][csv]") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-20) == "-1.5e-20");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-30, 30);
  for (int i = 0; i < 2000; ++i) {
    const double x = mant(rng) * std::pow(10.0, ex(rng));
    const double y = std::strtod(format_number(x).c_str(), nullptr);
    CHECK(std::abs(y - x) <= 5e-15 * std::abs(x));
    CHECK(format_number(y) == format_number(x));
  }
}

TEST_CASE("CSV round trip and strict reading", "[io][csv]") {
  Table t;
  t.header = {"a", "b"};
  t.rows = {{1.0, 2.5}, {-3.25, 1e-300}};
  std::stringstream ss;
  write_csv(ss, t);
  CHECK(ss.str() == "a,b\n1,2.5\n-3.25,1e-300\n");
  const Table back = read_csv(ss);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.values("b") == std::vector<double>{2.5, 1e-300});
  CHECK_THROWS_AS(back.column("c"), InvalidInput);

  std::stringstream bad("a,b\n1\n");
  CHECK_THROWS_AS(read_csv(bad), InvalidInput);
  std::stringstream junk("a\n1x\n");
  CHECK_THROWS_AS(read_csv(junk), InvalidInput);
  Table ragged{{"a"}, {{1.0, 2.0}}};
  std::stringstream out;
  CHECK_THROWS_AS(write_csv(out, ragged), InvalidInput);
}

TEST_CASE("trace files carry enough to regenerate the metrics", "[io][report]") {
  const Config c;
  auto s = c.scenario(1, scenarios::ControllerKind::nflc);
  const auto run = scenarios::run_case(s, c.machine);
  const Table t = trace_table(run.trace, run.reference);
  CHECK(t.header.front() == "time");
  CHECK(t.rows.size() == run.trace.times.size());
  std::stringstream ss;
  write_csv(ss, t);
  const Table back = read_csv(ss);
  // Terminal row of case 1 sits at operating point I.
  CHECK(back.rows.back()[back.column("V_t")] == Approx(1.17233).margin(1e-3));
  CHECK(back.rows.back()[back.column("E_FD")] == Approx(2.529).margin(1e-3));
  const auto m = metrics_from_table(back, s.metrics_from, s.limits);
  REQUIRE(m.channels.size() == run.metrics.channels.size());
  for (const auto& [name, ch] : run.metrics.channels) {
    INFO(name);
    const auto& r = m.channels.at(name);
    CHECK(r.overshoot_pct == Approx(ch.overshoot_pct).margin(1e-9));
    CHECK(r.steady_state_error == Approx(ch.steady_state_error).margin(1e-12));
    REQUIRE(r.settling_time.has_value() == ch.settling_time.has_value());
    if (ch.settling_time) CHECK(*r.settling_time == Approx(*ch.settling_time).margin(2e-3));
  }
  CHECK(m.saturation_duration == Approx(run.metrics.saturation_duration).margin(1e-9));
}

TEST_CASE("frequency tables", "[io][csv]") {
  std::vector<double> w{1.0, 2.0, 3.0};
  std::vector<CMat> v;
  // Phase walks past -180 degrees and must stay continuous.
  for (double ph : {-170.0, -185.0, -200.0}) {
    CMat m(1, 1);
    m(0, 0) = std::polar(10.0, ph * M_PI / 180.0);
    v.push_back(m);
  }
  const Table t = frequency_table(w, v, "L");
  CHECK(t.header == std::vector<std::string>{"omega", "L11_re", "L11_im", "L11_mag_db", "L11_phase_deg"});
  CHECK(t.rows[0][3] == Approx(20.0));
  CHECK(t.rows[1][4] == Approx(-185.0));
  CHECK(t.rows[2][4] == Approx(-200.0));
  CHECK_THROWS_AS(frequency_table({1.0}, {}, "L"), InvalidInput);
}

TEST_CASE("report JSON is machine-readable", "[io][report]") {
  RunReport r;
  r.config_hash = config_hash(Config{});
  CaseSummary c;
  c.case_id = 2;
  c.controller = "lqg";
  c.model = "cdm";
  c.metrics.channels["V_t"] = {1e-4, 2.0, std::nullopt, 1.17};
  r.cases.push_back(c);
  r.criteria.push_back({1, "x", true, "", 0.1});
  r.criteria.push_back({2, "y", false, "", 0.1});
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["config_hash"] == r.config_hash);
  CHECK(j["cases"][0]["channels"]["V_t"]["settling_time"].is_null());
  CHECK(j["all_pass"] == false);
  CHECK(r.to_text().find("FAIL 2") != std::string::npos);
  r.criteria.pop_back();
  CHECK(r.all_pass());
}

TEST_CASE("shipped default config matches the built-in defaults", "[io][config]") {
  CHECK(serialize_config(load_config(SMIB_DEFAULT_CONFIG)) == serialize_config(Config{}));
}
