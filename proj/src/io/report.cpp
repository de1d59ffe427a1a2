#include "smib/io/report.hpp"

#include "smib/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace smib::io {

using nlohmann::json;

scenarios::Metrics metrics_from_table(const Table& t, double from, const model::ActuatorLimits& limits) {
  scenarios::Metrics m;
  const auto times = t.values("time");
  for (const auto& h : t.header) {
    const auto pos = h.rfind("_ref");
    if (pos == std::string::npos || pos + 4 != h.size()) continue;
    const std::string name = h.substr(0, pos);
    const auto ref = t.values(h);
    if (ref.empty()) continue;
    m.channels[name] = scenarios::channel_metrics(times, t.values(name), ref.front(), from);
  }
  const auto efd = t.values("E_FD");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (efd[i] >= limits.efd_max - 1e-12 || efd[i] <= limits.efd_min + 1e-12) m.saturation_duration += times[i + 1] - times[i];
  return m;
}

namespace {

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json case_json(const CaseSummary& c) {
  json j;
  j["case"] = c.case_id;
  j["controller"] = c.controller;
  j["model"] = c.model;
  j["diverged"] = c.diverged;
  if (c.diverged) j["divergence_time"] = c.divergence_time;
  j["trace"] = c.trace_file;
  j["saturation_s"] = c.metrics.saturation_duration;
  for (const auto& [name, ch] : c.metrics.channels) {
    j["channels"][name] = {{"steady_state_error", ch.steady_state_error},
                           {"overshoot_pct", ch.overshoot_pct},
                           {"settling_time", number_or_null(ch.settling_time)},
                           {"final_mean", ch.final_mean}};
  }
  return j;
}

json margin_json(const freq::Margin& m) {
  return {{"value", number_or_null(m.value)}, {"frequency", number_or_null(m.frequency)}};
}

}  // namespace

std::string metrics_json(const CaseSummary& c) { return case_json(c).dump(2); }

std::string metrics_text(const CaseSummary& c) {
  std::ostringstream os;
  os << "case " << c.case_id << " " << c.controller << " on " << c.model;
  if (c.diverged) {
    os << ": diverged at t = " << c.divergence_time << "\n";
    return os.str();
  }
  os << " (E_FD saturated " << c.metrics.saturation_duration << " s)\n";
  os << "  channel     ss_error      overshoot_%   settling_s    final\n";
  for (const auto& [name, ch] : c.metrics.channels) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-8s %12.4e  %12.4f  %12s  %12.6f\n", name.c_str(), ch.steady_state_error,
                  ch.overshoot_pct, ch.settling_time ? std::to_string(*ch.settling_time).c_str() : "unsettled",
                  ch.final_mean);
    os << line;
  }
  return os.str();
}

bool RunReport::all_pass() const {
  for (const auto& c : criteria)
    if (!c.pass) return false;
  return true;
}

std::string RunReport::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["cases"] = json::array();
  for (const auto& c : cases) j["cases"].push_back(case_json(c));
  j["margins"] = json::array();
  for (const auto& r : margins) {
    j["margins"].push_back({{"q", r.loop.label},
                            {"H11", {{"gain_db", margin_json(r.h11.gain_db)}, {"phase_deg", margin_json(r.h11.phase_deg)}}},
                            {"H22", {{"gain_db", margin_json(r.h22.gain_db)}, {"phase_deg", margin_json(r.h22.phase_deg)}}}});
  }
  j["criteria"] = json::array();
  for (const auto& c : criteria)
    j["criteria"].push_back(
        {{"id", c.id}, {"title", c.title}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds}});
  j["all_pass"] = all_pass();
  return j.dump(2);
}

std::string RunReport::to_text() const {
  std::ostringstream os;
  os << "config " << config_hash << "\n\n";
  for (const auto& c : cases) os << metrics_text(c) << "\n";
  if (!margins.empty()) {
    os << "q          GM11 dB    PM11 deg   GM22 dB    PM22 deg\n";
    for (const auto& r : margins) {
      char line[160];
      std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s %-10s\n", r.loop.label.c_str(),
                    r.h11.gain_db.str().c_str(), r.h11.phase_deg.str().c_str(), r.h22.gain_db.str().c_str(),
                    r.h22.phase_deg.str().c_str());
      os << line;
    }
    os << "\n";
  }
  for (const auto& c : criteria) os << format_result(c) << "\n";
  return os.str();
}

}  // namespace smib::io
