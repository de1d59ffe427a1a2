#pragma once

#include "smib/errors.hpp"
#include "smib/model/params.hpp"
#include "smib/scenarios/scenario.hpp"
#include "smib/scenarios/studies.hpp"

#include <map>
#include <optional>
#include <string>

namespace smib::io {

/// Per-case overrides; unset fields keep the standard case definition.
struct CaseOverrides {
  std::optional<double> t_end, dt, initial_scale;
};

/// Sections: [machine], [limits], [controller.cdm], [controller.plant],
/// [scenario.1] ... [scenario.5], [freq], [output].
struct Config {
  model::MachineParams machine;
  model::ActuatorLimits limits;
  scenarios::ControllerSettings cdm_gains = scenarios::cdm_settings();
  scenarios::ControllerSettings plant_gains = scenarios::plant_settings();
  std::map<int, CaseOverrides> cases;
  scenarios::FrequencyStudy freq;
  std::string output_dir = "out";

  /// Scenario for a case with this config's parameters applied.
  scenarios::Scenario scenario(int case_id, scenarios::ControllerKind controller) const;
};

class ConfigError : public InvalidInput {
 public:
  // line 0: a whole-config range check, named by key in the message.
  ConfigError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Line-oriented `key = value` text under `[section]` headers; '#' starts a
/// comment. Unknown sections or keys, duplicates and non-finite numbers are
/// rejected with the offending line. Range violations name the key.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

/// Every key, with values printed to round-trip exactly.
std::string serialize_config(const Config& c);

/// FNV-1a of the serialized config, as 16 hex digits.
std::string config_hash(const Config& c);

}  // namespace smib::io
