#include "secdry/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace secdry {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- presets ---------------------------------------------------------------

Scenario make_default() {
  Scenario s;  // struct defaults are the Table-1 baseline
  return s;
}

Scenario make_case1() {
  Scenario s = make_default();
  s.name = "case1";
  s.params.E_a = 5000.0;
  s.params.A = 7.1e-4;
  s.params.c_s0 = 0.6415;
  return s;
}

Scenario make_case2() {
  Scenario s = make_default();
  s.name = "case2";
  s.params.E_a = 5700.0;
  s.params.A = 1e-3;
  s.params.c_s0 = 0.6415;
  return s;
}

Scenario make_case3() {
  Scenario s = make_default();
  s.name = "case3";
  s.params.E_a = 5920.0;
  s.params.A = 1.2e-3;
  s.params.h = 7.0;
  s.params.T_0 = 264.09;
  s.params.c_s0 = 0.0603;
  s.params.H = 0.0102;
  s.shelf.T_b0 = 264.09;
  s.shelf.T_b_max = 312.0;
  s.shelf.r = 0.5 / 60.0;
  return s;
}

Scenario make_caseA() {
  Scenario s = make_case1();  // same system, labelled "1"/"Case A" in the literature
  s.name = "caseA";
  return s;
}

Scenario make_caseB() {
  Scenario s = make_default();
  s.name = "caseB";
  s.params.k = 0.028;
  s.params.E_a = 5300.0;
  s.params.A = 4.5e-4;
  s.params.c_s0 = 0.1940;
  return s;
}

Scenario make_caseC() {
  Scenario s = make_default();
  s.name = "caseC";
  s.params.E_a = 37714.0;
  s.params.A = 277.0;
  s.params.h = 7.0;
  s.params.T_0 = 270.38;
  s.params.c_s0 = 0.0314;
  s.shelf.T_b0 = 270.38;
  s.shelf.r = 0.6 / 60.0;
  s.observer.gains = default_gains(SensorKind::bottom_point);
  return s;
}

Scenario make_caseD() {
  Scenario s = make_case3();
  s.name = "caseD";
  s.observer.gains = default_gains(SensorKind::bottom_point);
  return s;
}

}  // namespace

bool is_preset(const std::string& name) {
  for (const auto& p : preset_names()) {
    if (p == name) return true;
  }
  return false;
}

std::vector<std::string> preset_names() {
  return {"default", "case1", "case2", "case3", "caseA", "caseB", "caseC", "caseD"};
}

Scenario preset_scenario(const std::string& name) {
  if (name == "default") return make_default();
  if (name == "case1") return make_case1();
  if (name == "case2") return make_case2();
  if (name == "case3") return make_case3();
  if (name == "caseA") return make_caseA();
  if (name == "caseB") return make_caseB();
  if (name == "caseC") return make_caseC();
  if (name == "caseD") return make_caseD();
  throw Error(ErrorCategory::validation, "unknown preset '" + name + "'");
}

// ---- value parsing ---------------------------------------------------------

namespace {

struct UnitTable {
  // accepted unit suffix -> factor to SI; "" means a bare number is allowed
  std::map<std::string, double> factors;
};

const UnitTable kUnitless{{{"", 1.0}}};
const UnitTable kKelvin{{{"", 1.0}, {"K", 1.0}}};
const UnitTable kLength{{{"", 1.0}, {"m", 1.0}, {"cm", 0.01}, {"mm", 0.001}}};
const UnitTable kTime{{{"", 1.0}, {"s", 1.0}, {"min", 60.0}, {"h", 3600.0}}};
const UnitTable kRampRate{{{"", 1.0}, {"K/s", 1.0}, {"K/min", 1.0 / 60.0}, {"K/h", 1.0 / 3600.0}}};
const UnitTable kDensity{{{"", 1.0}, {"kg/m3", 1.0}}};
const UnitTable kConductivity{{{"", 1.0}, {"W/(m.K)", 1.0}}};
const UnitTable kHeatCapacity{{{"", 1.0}, {"J/(kg.K)", 1.0}}};
const UnitTable kSpecEnergy{{{"", 1.0}, {"J/kg", 1.0}}};
const UnitTable kMolarEnergy{{{"", 1.0}, {"J/mol", 1.0}}};
const UnitTable kPerSecond{{{"", 1.0}, {"1/s", 1.0}}};
const UnitTable kHtc{{{"", 1.0}, {"W/(m2.K)", 1.0}}};
const UnitTable kConc{{{"", 1.0}, {"kg/kg", 1.0}}};
const UnitTable kGasConst{{{"", 1.0}, {"J/(mol.K)", 1.0}}};
const UnitTable kVolGain{{{"", 1.0}, {"W/(m3.K)", 1.0}}};

double parse_quantity(const std::string& raw, const UnitTable& units,
                      const std::string& context) {
  std::istringstream in(raw);
  double value = 0.0;
  if (!(in >> value)) {
    throw Error(ErrorCategory::parse, context + ": '" + raw + "' is not a number");
  }
  std::string unit;
  in >> unit;
  std::string extra;
  if (in >> extra) {
    throw Error(ErrorCategory::parse, context + ": trailing text after unit in '" + raw + "'");
  }
  const auto it = units.factors.find(unit);
  if (it == units.factors.end()) {
    throw Error(ErrorCategory::parse, context + ": unsupported unit '" + unit + "'");
  }
  return value * it->second;
}

long long parse_integer(const std::string& raw, const std::string& context) {
  std::istringstream in(raw);
  long long value = 0;
  std::string extra;
  if (!(in >> value) || (in >> extra)) {
    throw Error(ErrorCategory::parse, context + ": '" + raw + "' is not an integer");
  }
  return value;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        std::vector<std::string>* warnings) {
  Scenario s = make_default();
  s.name = "";
  bool has_schedule = false;
  ObserverGains reduced = s.observer.gains;

  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCategory::parse, where + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "shelf" && section != "observer" &&
          section != "run" && section != "control") {
        throw Error(ErrorCategory::parse, where + ": unknown section [" + section + "]");
      }
      if (section == "control" && !s.controller) s.controller.emplace();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::parse, where + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorCategory::parse, where + ": empty key or value");
    }

    auto q = [&](const UnitTable& units) { return parse_quantity(value, units, where); };

    if (section.empty()) {
      if (key == "name") {
        s.name = value;
      } else {
        throw Error(ErrorCategory::parse, where + ": unknown key '" + key + "'");
      }
    } else if (section == "model") {
      auto& p = s.params;
      if (key == "rho") p.rho = q(kDensity);
      else if (key == "rho_d") p.rho_d = q(kDensity);
      else if (key == "k") p.k = q(kConductivity);
      else if (key == "C_p") p.C_p = q(kHeatCapacity);
      else if (key == "C_p_g") p.C_p_g = q(kHeatCapacity);
      else if (key == "dH_s") p.dH_s = q(kSpecEnergy);
      else if (key == "E_a") p.E_a = q(kMolarEnergy);
      else if (key == "A") p.A = q(kPerSecond);
      else if (key == "h") p.h = q(kHtc);
      else if (key == "T_0") p.T_0 = q(kKelvin);
      else if (key == "c_s0") p.c_s0 = q(kConc);
      else if (key == "c_s_eq") p.c_s_eq = q(kConc);
      else if (key == "H") p.H = q(kLength);
      else if (key == "R") p.R = q(kGasConst);
      else if (key == "m") p.m = static_cast<int>(parse_integer(value, where));
      else throw Error(ErrorCategory::parse, where + ": unknown key '" + key + "' in [model]");
    } else if (section == "shelf") {
      if (key == "T_b0") s.shelf.T_b0 = q(kKelvin);
      else if (key == "r") s.shelf.r = q(kRampRate);
      else if (key == "T_b_max") s.shelf.T_b_max = q(kKelvin);
      else throw Error(ErrorCategory::parse, where + ": unknown key '" + key + "' in [shelf]");
    } else if (section == "observer") {
      if (key == "sensor") {
        if (value == "full") {
          s.observer.gains.sensor = SensorKind::full_field;
        } else if (value == "bottom") {
          s.observer.gains.sensor = SensorKind::bottom_point;
        } else {
          throw Error(ErrorCategory::parse, where + ": sensor must be 'full' or 'bottom'");
        }
      } else if (key == "L_T") s.observer.gains.L_T = q(kUnitless);
      else if (key == "L_c") s.observer.gains.L_c = q(kUnitless);
      else if (key == "init_cs") s.observer.init_cs = q(kConc);
      else if (key == "L_T2") { reduced.L_T = q(kUnitless); has_schedule = true; }
      else if (key == "L_c2") { reduced.L_c = q(kUnitless); has_schedule = true; }
      else if (key == "switch_time") {
        has_schedule = true;
        if (value == "4tau") {
          s.observer.switch_at_4tau = true;
        } else {
          s.observer.switch_time = q(kTime);
        }
      } else {
        throw Error(ErrorCategory::parse, where + ": unknown key '" + key + "' in [observer]");
      }
    } else if (section == "run") {
      if (key == "sampling_period") s.sampling_period = q(kTime);
      else if (key == "noise_3sigma") s.noise_3sigma = q(kKelvin);
      else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_integer(value, where));
      else if (key == "threshold") s.threshold = q(kConc);
      else if (key == "horizon") s.horizon = q(kTime);
      else throw Error(ErrorCategory::parse, where + ": unknown key '" + key + "' in [run]");
    } else if (section == "control") {
      if (key == "K") s.controller->K = q(kVolGain);
      else if (key == "T_up") s.controller->T_up = q(kKelvin);
      else throw Error(ErrorCategory::parse, where + ": unknown key '" + key + "' in [control]");
    }
  }

  if (s.name.empty()) s.name = "unnamed";
  if (has_schedule) {
    reduced.sensor = s.observer.gains.sensor;
    s.observer.reduced = reduced;
  }

  const auto warn = validate(s);
  if (warnings) warnings->insert(warnings->end(), warn.begin(), warn.end());
  return s;
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> warnings = validate(s.params);
  validate(s.shelf);
  if (!(s.sampling_period > 0.0)) {
    throw Error(ErrorCategory::validation, "sampling_period must be > 0");
  }
  if (s.noise_3sigma < 0.0) {
    throw Error(ErrorCategory::validation, "noise_3sigma must be >= 0");
  }
  if (!(s.threshold > 0.0)) {
    throw Error(ErrorCategory::validation, "threshold must be > 0");
  }
  if (!(s.horizon > 0.0)) {
    throw Error(ErrorCategory::validation, "horizon must be > 0");
  }
  if (s.observer.init_cs < 0.0) {
    throw Error(ErrorCategory::validation, "init_cs must be >= 0");
  }
  if (s.observer.reduced) {
    if (s.observer.reduced->sensor != s.observer.gains.sensor) {
      throw Error(ErrorCategory::validation, "gain schedule mixes sensor kinds");
    }
    if (!s.observer.switch_at_4tau && !(s.observer.switch_time > 0.0)) {
      throw Error(ErrorCategory::validation, "schedule switch_time must be > 0 (or '4tau')");
    }
  }
  if (s.controller && (s.controller->K < 0.0 || !(s.controller->T_up > 0.0))) {
    throw Error(ErrorCategory::validation, "controller needs K >= 0 and T_up > 0");
  }
  for (const auto& w : validate(s.observer.gains)) warnings.push_back(w);
  return warnings;
}

Scenario load_scenario(const std::string& path_or_preset,
                       std::vector<std::string>* warnings) {
  if (is_preset(path_or_preset)) return preset_scenario(path_or_preset);
  std::ifstream in(path_or_preset);
  if (!in) {
    throw Error(ErrorCategory::io,
                "'" + path_or_preset + "' is neither a preset nor a readable file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path_or_preset, warnings);
}

std::string scenario_to_string(const Scenario& s) {
  std::ostringstream out;
  auto num = [](double v) { return format_double(v); };
  out << "name = " << s.name << "\n\n";
  const auto& p = s.params;
  out << "[model]\n"
      << "rho = " << num(p.rho) << " kg/m3\n"
      << "rho_d = " << num(p.rho_d) << " kg/m3\n"
      << "k = " << num(p.k) << " W/(m.K)\n"
      << "C_p = " << num(p.C_p) << " J/(kg.K)\n"
      << "C_p_g = " << num(p.C_p_g) << " J/(kg.K)\n"
      << "dH_s = " << num(p.dH_s) << " J/kg\n"
      << "E_a = " << num(p.E_a) << " J/mol\n"
      << "A = " << num(p.A) << " 1/s\n"
      << "h = " << num(p.h) << " W/(m2.K)\n"
      << "T_0 = " << num(p.T_0) << " K\n"
      << "c_s0 = " << num(p.c_s0) << " kg/kg\n"
      << "c_s_eq = " << num(p.c_s_eq) << " kg/kg\n"
      << "H = " << num(p.H) << " m\n"
      << "R = " << num(p.R) << " J/(mol.K)\n"
      << "m = " << p.m << "\n\n";
  out << "[shelf]\n"
      << "T_b0 = " << num(s.shelf.T_b0) << " K\n"
      << "r = " << num(s.shelf.r) << " K/s\n"
      << "T_b_max = " << num(s.shelf.T_b_max) << " K\n\n";
  out << "[observer]\n"
      << "sensor = " << to_string(s.observer.gains.sensor) << "\n"
      << "L_T = " << num(s.observer.gains.L_T) << "\n"
      << "L_c = " << num(s.observer.gains.L_c) << "\n"
      << "init_cs = " << num(s.observer.init_cs) << " kg/kg\n";
  if (s.observer.reduced) {
    out << "L_T2 = " << num(s.observer.reduced->L_T) << "\n"
        << "L_c2 = " << num(s.observer.reduced->L_c) << "\n"
        << "switch_time = "
        << (s.observer.switch_at_4tau ? std::string("4tau")
                                      : num(s.observer.switch_time) + " s")
        << "\n";
  }
  out << "\n[run]\n"
      << "sampling_period = " << num(s.sampling_period) << " s\n"
      << "noise_3sigma = " << num(s.noise_3sigma) << " K\n"
      << "seed = " << s.seed << "\n"
      << "threshold = " << num(s.threshold) << " kg/kg\n"
      << "horizon = " << num(s.horizon) << " s\n";
  if (s.controller) {
    out << "\n[control]\n"
        << "K = " << num(s.controller->K) << " W/(m3.K)\n"
        << "T_up = " << num(s.controller->T_up) << " K\n";
  }
  return out.str();
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot write '" + path + "'");
  }
  out << scenario_to_string(s);
}

}  // namespace secdry
