#ifndef SECDRY_SCENARIO_HPP
#define SECDRY_SCENARIO_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "secdry/control.hpp"
#include "secdry/observer.hpp"

namespace secdry {

/// Observer branch of a scenario. When `reduced` is set the run uses gain
/// scheduling: `gains` until the switch time, `reduced` afterwards. The
/// switch time is either explicit (seconds) or resolved at run time to
/// 4 tau of the initial-gain error dynamics (`switch_at_4tau`).
struct ObserverConfig {
  ObserverGains gains;
  double init_cs = 0.0314;
  std::optional<ObserverGains> reduced;
  double switch_time = 0.0;
  bool switch_at_4tau = false;

  friend bool operator==(const ObserverConfig&, const ObserverConfig&) = default;
};

/// A complete runnable configuration: model, shelf program, observer,
/// sampling/noise, termination and optional microwave controller.
struct Scenario {
  std::string name = "default";
  ModelParameters params;
  ShelfSchedule shelf;
  ObserverConfig observer;
  double sampling_period = 10.0;  ///< s
  double noise_3sigma = 0.0;      ///< K; noise sigma is this / 3
  std::uint64_t seed = 0;
  double threshold = 0.01;        ///< drying threshold, kg/kg
  double horizon = 48.0 * 3600.0; ///< s
  std::optional<MicrowaveController> controller;

  double noise_sigma() const { return noise_3sigma / 3.0; }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Preset names: default (Table-1 baseline), case1..case3 (validation
/// systems) and caseA..caseD (experimental systems; caseA is the same
/// system as case1, caseC/caseD use the bottom-point sensor with the
/// modified-observer gains).
bool is_preset(const std::string& name);
Scenario preset_scenario(const std::string& name);
std::vector<std::string> preset_names();

/// Loads a preset by name or parses a scenario file. Unknown keys are
/// rejected with line context; invariants are validated (hard errors throw,
/// warnings are appended to `warnings` when non-null).
Scenario load_scenario(const std::string& path_or_preset,
                       std::vector<std::string>* warnings = nullptr);

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        std::vector<std::string>* warnings = nullptr);

/// Canonical text form (SI units, explicit suffixes). load(save(s)) == s.
std::string scenario_to_string(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);

/// Hard-error validation plus collected warnings.
std::vector<std::string> validate(const Scenario& s);

}  // namespace secdry

#endif  // SECDRY_SCENARIO_HPP
