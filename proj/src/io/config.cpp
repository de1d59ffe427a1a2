#include "smib/io/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace smib::io {

using scenarios::ControllerSettings;

ConfigError::ConfigError(int line, const std::string& what)
    : InvalidInput(line > 0 ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto r = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size())
    throw InvalidInput("'" + t + "' is not a number");
  if (!std::isfinite(v)) throw InvalidInput("value must be finite");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

// Rows separated by ';', entries by ','.
Mat parse_matrix(const std::string& text, Eigen::Index rows, Eigen::Index cols) {
  std::vector<std::vector<double>> data;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) data.push_back(parse_list(row));
  if (Eigen::Index(data.size()) != rows) throw InvalidInput("expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (Eigen::Index(data[i].size()) != cols) throw InvalidInput("expected " + std::to_string(cols) + " columns");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[i][j];
  }
  return m;
}

std::string fmt_matrix(const Mat& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) s += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + fmt(m(i, j));
  }
  return s;
}

bool parse_bool(const std::string& t) {
  if (t == "true") return true;
  if (t == "false") return false;
  throw InvalidInput("expected true or false");
}

struct Binding {
  std::string section, key;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

template <class Access>
Binding number(std::string section, std::string key, Access a) {
  return {std::move(section), std::move(key), [a](const Config& c) { return fmt(a(const_cast<Config&>(c))); },
          [a](Config& c, const std::string& v) { a(c) = parse_number(v); }};
}

template <class Access>
Binding optional_number(std::string section, std::string key, Access a) {
  return {std::move(section), std::move(key),
          [a](const Config& c) {
            const auto& o = a(const_cast<Config&>(c));
            return o ? fmt(*o) : std::string("none");
          },
          [a](Config& c, const std::string& v) {
            if (v == "none")
              a(c).reset();
            else
              a(c) = parse_number(v);
          }};
}

template <class Access>
Binding matrix(std::string section, std::string key, Eigen::Index rows, Eigen::Index cols, Access a) {
  return {std::move(section), std::move(key), [a](const Config& c) { return fmt_matrix(a(const_cast<Config&>(c))); },
          [a, rows, cols](Config& c, const std::string& v) { a(c) = parse_matrix(v, rows, cols); }};
}

void add_gain_bindings(std::vector<Binding>& b, const std::string& sec, ControllerSettings Config::*set) {
  b.push_back(matrix(sec, "nflc.K_G", 1, 3, [set](Config& c) -> auto& { return (c.*set).nflc.K_G; }));
  b.push_back(matrix(sec, "nflc.K_T", 1, 2, [set](Config& c) -> auto& { return (c.*set).nflc.K_T; }));
  b.push_back(matrix(sec, "inflc.K_G", 1, 3, [set](Config& c) -> auto& { return (c.*set).inflc.K_G; }));
  b.push_back(number(sec, "inflc.K_iG", [set](Config& c) -> double& { return (c.*set).inflc.K_iG; }));
  b.push_back(matrix(sec, "inflc.K_T", 1, 2, [set](Config& c) -> auto& { return (c.*set).inflc.K_T; }));
  b.push_back(number(sec, "inflc.K_iT", [set](Config& c) -> double& { return (c.*set).inflc.K_iT; }));
  b.push_back(matrix(sec, "lqg.K", 2, 5, [set](Config& c) -> Mat& { return (c.*set).lqg_K; }));
  b.push_back(number(sec, "lqg.q", [set](Config& c) -> double& { return (c.*set).ltr.q; }));
  b.push_back(matrix(sec, "lqg.V10", 5, 5, [set](Config& c) -> Mat& { return (c.*set).ltr.V10; }));
  b.push_back(matrix(sec, "lqg.V", 2, 2, [set](Config& c) -> Mat& { return (c.*set).ltr.V; }));
  b.push_back(matrix(sec, "lqg.V2", 2, 2, [set](Config& c) -> Mat& { return (c.*set).ltr.V2; }));
  b.push_back(matrix(sec, "lqr.K", 2, 5, [set](Config& c) -> Mat& { return (c.*set).lqr_K; }));
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> b;
#define SMIB_MACHINE(field) b.push_back(number("machine", #field, [](Config& c) -> double& { return c.machine.field; }))
    SMIB_MACHINE(L_d);
    SMIB_MACHINE(L_F);
    SMIB_MACHINE(L_D);
    SMIB_MACHINE(L_q);
    SMIB_MACHINE(L_Q);
    SMIB_MACHINE(kM_F);
    SMIB_MACHINE(kM_D);
    SMIB_MACHINE(M_R);
    SMIB_MACHINE(kM_Q);
    SMIB_MACHINE(r);
    SMIB_MACHINE(r_F);
    SMIB_MACHINE(r_D);
    SMIB_MACHINE(r_Q);
    SMIB_MACHINE(H);
    SMIB_MACHINE(D);
    SMIB_MACHINE(R_e);
    SMIB_MACHINE(L_e);
    SMIB_MACHINE(K_T);
    SMIB_MACHINE(K_G);
    SMIB_MACHINE(tau_T);
    SMIB_MACHINE(tau_G);
    SMIB_MACHINE(R_T);
    SMIB_MACHINE(V_inf);
    SMIB_MACHINE(alpha);
    SMIB_MACHINE(omega_R);
    SMIB_MACHINE(omega_base);
#undef SMIB_MACHINE
    b.push_back(optional_number("machine", "transient_inductance",
                                [](Config& c) -> auto& { return c.machine.transient_inductance; }));
    b.push_back(optional_number("machine", "open_circuit_time_constant",
                                [](Config& c) -> auto& { return c.machine.open_circuit_time_constant; }));
    b.push_back({"machine", "neglect_stator_resistance",
                 [](const Config& c) { return std::string(c.machine.cdm_neglect_stator_resistance ? "true" : "false"); },
                 [](Config& c, const std::string& v) { c.machine.cdm_neglect_stator_resistance = parse_bool(v); }});

    b.push_back(number("limits", "efd_min", [](Config& c) -> double& { return c.limits.efd_min; }));
    b.push_back(number("limits", "efd_max", [](Config& c) -> double& { return c.limits.efd_max; }));
    b.push_back(number("limits", "gv_min", [](Config& c) -> double& { return c.limits.gv_min; }));
    b.push_back(number("limits", "gv_max", [](Config& c) -> double& { return c.limits.gv_max; }));

    add_gain_bindings(b, "controller.cdm", &Config::cdm_gains);
    add_gain_bindings(b, "controller.plant", &Config::plant_gains);

    for (int id = 1; id <= 5; ++id) {
      const std::string sec = "scenario." + std::to_string(id);
      using Field = std::optional<double> CaseOverrides::*;
      for (auto [key, field] : {std::pair<const char*, Field>{"t_end", &CaseOverrides::t_end},
                                {"dt", &CaseOverrides::dt},
                                {"initial_scale", &CaseOverrides::initial_scale}}) {
        b.push_back({sec, key,
                     [id, field](const Config& c) {
                       const auto it = c.cases.find(id);
                       return it != c.cases.end() && it->second.*field ? fmt(*(it->second.*field)) : std::string("none");
                     },
                     [id, field](Config& c, const std::string& v) {
                       if (v == "none")
                         (c.cases[id].*field).reset();
                       else
                         c.cases[id].*field = parse_number(v);
                     }});
      }
    }

    b.push_back(number("freq", "w_min", [](Config& c) -> double& { return c.freq.w_min; }));
    b.push_back(number("freq", "w_max", [](Config& c) -> double& { return c.freq.w_max; }));
    b.push_back({"freq", "points", [](const Config& c) { return std::to_string(c.freq.points); },
                 [](Config& c, const std::string& v) {
                   const double n = parse_number(v);
                   if (n != std::floor(n) || n < 0) throw InvalidInput("points must be a non-negative integer");
                   c.freq.points = std::size_t(n);
                 }});
    b.push_back({"freq", "q_ladder", [](const Config& c) { return fmt_list(c.freq.q_ladder); },
                 [](Config& c, const std::string& v) { c.freq.q_ladder = parse_list(v); }});
    b.push_back({"freq", "ideal", [](const Config& c) { return std::string(c.freq.ideal ? "true" : "false"); },
                 [](Config& c, const std::string& v) { c.freq.ideal = parse_bool(v); }});
    b.push_back(number("freq", "ideal_q", [](Config& c) -> double& { return c.freq.ideal_q; }));
    b.push_back(number("freq", "nyquist_w_min", [](Config& c) -> double& { return c.freq.nyquist_w_min; }));
    b.push_back({"freq", "nyquist_points", [](const Config& c) { return std::to_string(c.freq.nyquist_points); },
                 [](Config& c, const std::string& v) {
                   const double n = parse_number(v);
                   if (n != std::floor(n) || n < 0) throw InvalidInput("nyquist_points must be a non-negative integer");
                   c.freq.nyquist_points = std::size_t(n);
                 }});

    b.push_back({"output", "dir", [](const Config& c) { return c.output_dir; },
                 [](Config& c, const std::string& v) {
                   if (v.empty()) throw InvalidInput("dir must not be empty");
                   c.output_dir = v;
                 }});
    return b;
  }();
  return table;
}

void validate(const Config& c) {
  try {
    c.machine.validate();
    if (c.machine.transient_inductance && !(*c.machine.transient_inductance > 0.0))
      throw InvalidInput("machine parameter transient_inductance must be positive");
    if (c.machine.open_circuit_time_constant && !(*c.machine.open_circuit_time_constant > 0.0))
      throw InvalidInput("machine parameter open_circuit_time_constant must be positive");
    if (!(c.limits.efd_min < c.limits.efd_max)) throw InvalidInput("limits: efd_min must be below efd_max");
    if (!(c.limits.gv_min < c.limits.gv_max)) throw InvalidInput("limits: gv_min must be below gv_max");
    for (const auto* g : {&c.cdm_gains, &c.plant_gains}) {
      if (!(g->ltr.q >= 0.0)) throw InvalidInput("controller: lqg.q must be non-negative");
    }
    for (const auto& [id, o] : c.cases) {
      const std::string sec = "scenario." + std::to_string(id) + ": ";
      if (o.t_end && !(*o.t_end > 0.0)) throw InvalidInput(sec + "t_end must be positive");
      if (o.dt && !(*o.dt > 0.0)) throw InvalidInput(sec + "dt must be positive");
      if (o.initial_scale && !(*o.initial_scale > 0.0)) throw InvalidInput(sec + "initial_scale must be positive");
    }
    c.freq.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(0, e.what());
  }
}

}  // namespace

scenarios::Scenario Config::scenario(int case_id, scenarios::ControllerKind controller) const {
  auto s = scenarios::make_case(case_id, controller);
  s.gains = s.model == scenarios::ModelKind::plant ? plant_gains : cdm_gains;
  const double gv_max = s.limits.gv_max;
  s.limits = limits;
  // Case 5 needs the gate above the nominal limit to reach its equilibrium.
  if (case_id == 5) s.limits.gv_max = std::max(limits.gv_max, gv_max);
  if (auto it = cases.find(case_id); it != cases.end()) {
    if (it->second.t_end) s.t_end = *it->second.t_end;
    if (it->second.dt) s.dt = *it->second.dt;
    if (it->second.initial_scale) s.initial_scale = *it->second.initial_scale;
  }
  return s;
}

Config parse_config(const std::string& text) {
  Config c;
  std::set<std::string> sections;
  for (const auto& b : bindings()) sections.insert(b.section);

  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = raw;
    if (const auto hash = l.find('#'); hash != std::string::npos) l.erase(hash);
    l = trim(l);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') throw ConfigError(line, "malformed section header");
      section = trim(l.substr(1, l.size() - 2));
      if (!sections.count(section)) throw ConfigError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    if (section.empty()) throw ConfigError(line, "key outside any section");
    const std::string key = trim(l.substr(0, eq));
    const std::string value = trim(l.substr(eq + 1));
    const Binding* hit = nullptr;
    for (const auto& b : bindings())
      if (b.section == section && b.key == key) hit = &b;
    if (!hit) throw ConfigError(line, "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert({section, key}).second) throw ConfigError(line, "duplicate key '" + key + "'");
    try {
      hit->set(c, value);
    } catch (const InvalidInput& e) {
      throw ConfigError(line, key + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const Config& c) {
  std::string out, section;
  for (const auto& b : bindings()) {
    if (b.section != section) {
      out += (section.empty() ? "[" : "\n[") + b.section + "]\n";
      section = b.section;
    }
    out += b.key + " = " + b.get(c) + "\n";
  }
  return out;
}

std::string config_hash(const Config& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace smib::io
