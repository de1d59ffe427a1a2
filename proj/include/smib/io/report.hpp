#pragma once

#include "smib/io/acceptance.hpp"
#include "smib/io/csv.hpp"
#include "smib/model/params.hpp"
#include "smib/scenarios/scenario.hpp"
#include "smib/scenarios/studies.hpp"

#include <map>
#include <string>
#include <vector>

namespace smib::io {

struct CaseSummary {
  int case_id = 0;
  std::string controller, model;
  bool diverged = false;
  double divergence_time = 0.0;
  scenarios::Metrics metrics;
  std::string trace_file;  // relative to the output directory
};

/// Metrics of a trace CSV written by trace_table: references come from its
/// `<name>_ref` columns, so the file alone is enough.
scenarios::Metrics metrics_from_table(const Table& t, double from, const model::ActuatorLimits& limits);

struct RunReport {
  std::string config_hash;
  std::vector<CaseSummary> cases;
  std::vector<scenarios::MarginRow> margins;
  std::vector<CriterionResult> criteria;

  bool all_pass() const;
  std::string to_json() const;  // machine-readable
  std::string to_text() const;  // one block per section
};

/// JSON of one case's metrics, also used by the `case` command.
std::string metrics_json(const CaseSummary& c);
std::string metrics_text(const CaseSummary& c);

}  // namespace smib::io
