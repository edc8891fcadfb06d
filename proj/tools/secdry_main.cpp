// secdry - secondary-drying simulation, state estimation and control CLI.
//
// Subcommands: simulate | observe | design | sweep | control | calibrate.
// Every run writes its CSV outputs plus a manifest.json recording the
// resolved configuration, seed and headline results; rerunning with the
// written scenario_resolved.cfg reproduces the outputs bit-identically.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "secdry/csv.hpp"
#include "secdry/scenario.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace secdry;

namespace {

struct CommonArgs {
  std::string scenario = "default";
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> sampling_period;
  std::optional<double> noise_3sigma;
  std::optional<std::string> gains;
  std::optional<std::string> gain_schedule;
  std::optional<std::string> sensor;
  std::optional<double> init_cs;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario,
                  "Preset name (default, case1..case3, caseA..caseD) or scenario file");
  cmd->add_option("--out-dir", args.out_dir, "Output directory (default ./out-<subcommand>)");
  cmd->add_option("--seed", args.seed, "Root RNG seed (overrides scenario)");
  cmd->add_option("--sampling-period", args.sampling_period, "Sampling period, s");
  cmd->add_option("--noise-3sigma", args.noise_3sigma, "Measurement noise 3-sigma, K");
  cmd->add_option("--gains", args.gains, "Observer gains LT,LC");
  cmd->add_option("--gain-schedule", args.gain_schedule,
                  "Scheduled gains LT1,LC1:LT2,LC2@<switch_s|4tau>");
  cmd->add_option("--sensor", args.sensor, "Sensor kind: full | bottom")
      ->check(CLI::IsMember({"full", "bottom"}));
  cmd->add_option("--init-cs", args.init_cs, "Initial concentration estimate, kg/kg");
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw Error(ErrorCategory::parse, what + ": expected 'LT,LC', got '" + text + "'");
  }
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCategory::parse, what + ": bad number in '" + text + "'");
  }
}

Scenario resolve_scenario(const CommonArgs& args, std::vector<std::string>& warnings) {
  Scenario s = load_scenario(args.scenario, &warnings);
  if (args.sensor) {
    const SensorKind kind =
        *args.sensor == "full" ? SensorKind::full_field : SensorKind::bottom_point;
    if (kind != s.observer.gains.sensor) {
      s.observer.gains = default_gains(kind);
      if (s.observer.reduced) s.observer.reduced->sensor = kind;
    }
  }
  if (args.gains) {
    const auto [lt, lc] = parse_pair(*args.gains, "--gains");
    s.observer.gains.L_T = lt;
    s.observer.gains.L_c = lc;
    s.observer.reduced.reset();
    s.observer.switch_at_4tau = false;
  }
  if (args.gain_schedule) {
    const auto at = args.gain_schedule->find('@');
    if (at == std::string::npos) {
      throw Error(ErrorCategory::parse, "--gain-schedule needs '@<switch_s|4tau>'");
    }
    const std::string pairs = args.gain_schedule->substr(0, at);
    const std::string when = args.gain_schedule->substr(at + 1);
    const auto colon = pairs.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCategory::parse, "--gain-schedule needs 'LT1,LC1:LT2,LC2'");
    }
    const auto [lt1, lc1] = parse_pair(pairs.substr(0, colon), "--gain-schedule");
    const auto [lt2, lc2] = parse_pair(pairs.substr(colon + 1), "--gain-schedule");
    s.observer.gains.L_T = lt1;
    s.observer.gains.L_c = lc1;
    ObserverGains reduced = s.observer.gains;
    reduced.L_T = lt2;
    reduced.L_c = lc2;
    s.observer.reduced = reduced;
    if (when == "4tau") {
      s.observer.switch_at_4tau = true;
      s.observer.switch_time = 0.0;
    } else {
      s.observer.switch_at_4tau = false;
      try {
        s.observer.switch_time = std::stod(when);
      } catch (const std::exception&) {
        throw Error(ErrorCategory::parse, "--gain-schedule switch must be seconds or 4tau");
      }
    }
  }
  if (args.seed) s.seed = *args.seed;
  if (args.sampling_period) s.sampling_period = *args.sampling_period;
  if (args.noise_3sigma) s.noise_3sigma = *args.noise_3sigma;
  if (args.init_cs) s.observer.init_cs = *args.init_cs;
  const auto more = validate(s);
  warnings.insert(warnings.end(), more.begin(), more.end());
  return s;
}

fs::path prepare_out_dir(const CommonArgs& args, const std::string& subcommand) {
  fs::path dir = args.out_dir.empty() ? fs::path("out-" + subcommand) : fs::path(args.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCategory::io, "cannot create output directory '" + dir.string() + "'");
  }
  return dir;
}

json manifest_base(const std::string& subcommand, const Scenario& s,
                   const std::vector<std::string>& warnings, int argc, char** argv) {
  json man;
  man["tool"] = "secdry";
  man["version"] = SECDRY_VERSION;
  man["subcommand"] = subcommand;
  std::ostringstream cmd;
  for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
  man["command_line"] = cmd.str();
  man["seed"] = s.seed;
  man["scenario"]["name"] = s.name;
  man["scenario"]["resolved"] = scenario_to_string(s);
  man["warnings"] = warnings;
  return man;
}

void finish(const fs::path& dir, const Scenario& s, json& man) {
  save_scenario(s, (dir / "scenario_resolved.cfg").string());
  std::ofstream out(dir / "manifest.json");
  out << man.dump(2) << "\n";
  std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
}

/// Truth runs feeding error computations cap the node spacing so that the
/// linear truth resampling stays well inside the measurement tolerance.
IntegratorSettings truth_settings() {
  IntegratorSettings st;
  st.max_step = 60.0;
  return st;
}

GainsOrSchedule scheduled_gains(const Scenario& s, json* man) {
  if (!s.observer.reduced) return s.observer.gains;
  GainSchedule sched;
  sched.initial = s.observer.gains;
  sched.reduced = *s.observer.reduced;
  if (s.observer.switch_at_4tau) {
    const LinearizedSystem lin = nominal_linearization(
        s.params, s.shelf, s.observer.gains.sensor, s.threshold, IntegratorSettings{}, s.horizon);
    const ErrorDynamics ed = error_dynamics(lin, s.observer.gains);
    sched.switch_time = 4.0 * time_constant(ed);
    if (man) (*man)["results"]["schedule_switch_s"] = sched.switch_time;
  } else {
    sched.switch_time = s.observer.switch_time;
  }
  return sched;
}

// ---- subcommands ------------------------------------------------------------

int cmd_simulate(const CommonArgs& args, std::optional<double> until_dry,
                 std::optional<double> horizon, int argc, char** argv) {
  std::vector<std::string> warnings;
  Scenario s = resolve_scenario(args, warnings);
  if (horizon) s.horizon = *horizon;
  const fs::path dir = prepare_out_dir(args, "simulate");
  json man = manifest_base("simulate", s, warnings, argc, argv);

  Trajectory traj;
  if (until_dry) {
    auto dry = run_until_dry(s.params, s.shelf, *until_dry, IntegratorSettings{}, s.horizon);
    traj = std::move(dry.trajectory);
    man["results"]["drying_time_s"] = dry.drying_time;
    man["results"]["drying_threshold"] = *until_dry;
  } else {
    traj = integrate(s.params, s.shelf, nullptr, 0.0, s.horizon, IntegratorSettings{});
  }
  {
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_file((dir / "trajectory.csv").string(), csv.str());
  }
  if (traj.end_time() - traj.start_time() >= s.sampling_period) {
    const MeasurementSeries meas = sample_measurements(
        traj, s.sampling_period, s.observer.gains.sensor, s.noise_sigma(), s.seed);
    std::ostringstream csv;
    write_measurements_csv(csv, meas);
    write_file((dir / "measurements.csv").string(), csv.str());
    man["outputs"]["measurements"] = "measurements.csv";
  }
  man["outputs"]["trajectory"] = "trajectory.csv";
  man["results"]["end_time_s"] = traj.end_time();
  man["results"]["final_cs_avg"] = traj.c_s_avg().back();
  finish(dir, s, man);
  return 0;
}

int cmd_observe(const CommonArgs& args, const std::string& measurements_path,
                std::optional<double> horizon, int argc, char** argv) {
  std::vector<std::string> warnings;
  Scenario s = resolve_scenario(args, warnings);
  if (horizon) s.horizon = *horizon;
  const fs::path dir = prepare_out_dir(args, "observe");
  json man = manifest_base("observe", s, warnings, argc, argv);

  std::optional<Trajectory> truth;
  MeasurementSeries meas;
  if (!measurements_path.empty()) {
    std::ifstream in(measurements_path);
    if (!in) throw Error(ErrorCategory::io, "cannot read '" + measurements_path + "'");
    meas = read_measurements_csv(in, measurements_path);
    if (meas.sensor != s.observer.gains.sensor) {
      throw Error(ErrorCategory::shape_mismatch,
                  "measurement file sensor kind differs from the scenario's");
    }
  } else {
    auto dry = run_until_dry(s.params, s.shelf, s.threshold, truth_settings(), s.horizon);
    truth = std::move(dry.trajectory);
    man["results"]["drying_time_s"] = dry.drying_time;
    meas = sample_measurements(*truth, s.sampling_period, s.observer.gains.sensor,
                               s.noise_sigma(), s.seed);
    std::ostringstream csv;
    write_measurements_csv(csv, meas);
    write_file((dir / "measurements.csv").string(), csv.str());
    std::ostringstream tcsv;
    write_trajectory_csv(tcsv, *truth);
    write_file((dir / "truth.csv").string(), tcsv.str());
  }

  const GainsOrSchedule gains = scheduled_gains(s, &man);
  const ProductState init =
      default_initial_estimate(meas, s.params.m, s.observer.init_cs);
  const EstimateTrajectory est = run_observer(meas, gains, init, s.params, s.shelf, {});

  std::optional<ErrorSeries> err;
  if (truth) {
    err = estimation_errors(est, *truth);
    man["results"]["initial_error_cs"] = err->initial_error;
    if (err->convergence_time) {
      man["results"]["convergence_time_s"] = *err->convergence_time;
    } else {
      man["results"]["convergence_time_s"] = nullptr;
    }
  }
  {
    std::ostringstream csv;
    write_estimate_csv(csv, est, err ? &*err : nullptr);
    write_file((dir / "estimate.csv").string(), csv.str());
  }
  man["outputs"]["estimate"] = "estimate.csv";
  finish(dir, s, man);
  return 0;
}

int cmd_design(const CommonArgs& args, int argc, char** argv) {
  std::vector<std::string> warnings;
  Scenario s = resolve_scenario(args, warnings);
  const fs::path dir = prepare_out_dir(args, "design");
  json man = manifest_base("design", s, warnings, argc, argv);

  const LinearizedSystem lin = nominal_linearization(
      s.params, s.shelf, s.observer.gains.sensor, s.threshold, IntegratorSettings{}, s.horizon);
  const ErrorDynamics ed = error_dynamics(lin, s.observer.gains);

  {
    std::ostringstream csv;
    csv << "index,re_1_per_s,im_1_per_s\n";
    for (Eigen::Index i = 0; i < ed.eigenvalues.size(); ++i) {
      csv << (i + 1) << ',' << format_sig(ed.eigenvalues[i].real()) << ','
          << format_sig(ed.eigenvalues[i].imag()) << "\n";
    }
    write_file((dir / "eigenvalues.csv").string(), csv.str());
  }
  man["results"]["stable"] = ed.stable;
  man["results"]["oscillatory"] = oscillatory(ed);
  man["results"]["T_ref_K"] = lin.x_ref.T[0];
  man["results"]["cs_ref"] = lin.x_ref.c_s[0];
  const double tau = time_constant(ed);
  man["results"]["tau_s"] = tau;
  man["results"]["convergence_estimate_s"] = 4.0 * tau;

  // modal contributions of the standard initialization error
  const int m = s.params.m;
  Vec e0 = Vec::Zero(2 * m);
  e0.tail(m).setConstant(s.observer.init_cs - s.params.c_s0);
  const ModalContributions nu = modal_contributions(ed, e0);
  {
    std::ostringstream csv;
    csv << "p,nu_p\n";
    for (Eigen::Index pidx = 0; pidx < nu.nu.size(); ++pidx) {
      csv << (pidx + 1) << ',' << format_sig(nu.nu[pidx]) << "\n";
    }
    write_file((dir / "modal_contributions.csv").string(), csv.str());
  }
  man["results"]["modal_reconstruction_rel_err"] = nu.reconstruction_rel_err;
  man["outputs"]["eigenvalues"] = "eigenvalues.csv";
  man["outputs"]["modal_contributions"] = "modal_contributions.csv";
  finish(dir, s, man);
  return 0;
}

std::vector<double> parse_range(const std::string& text, const std::string& what) {
  // from:to:count[:lin|log]; log spacing interpolates the magnitudes and
  // keeps the (common) sign
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() > 4) {
    throw Error(ErrorCategory::parse, what + ": expected from:to:count[:lin|log]");
  }
  double from = 0, to = 0;
  long count = 0;
  try {
    from = std::stod(parts[0]);
    to = std::stod(parts[1]);
    count = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCategory::parse, what + ": bad number in '" + text + "'");
  }
  const std::string mode = parts.size() == 4 ? parts[3] : "log";
  if (count < 1 || count > 10000) {
    throw Error(ErrorCategory::parse, what + ": count out of range");
  }
  std::vector<double> values(static_cast<std::size_t>(count));
  if (count == 1) {
    values[0] = from;
    return values;
  }
  if (mode == "log") {
    if (from == 0.0 || to == 0.0 || (from < 0) != (to < 0)) {
      throw Error(ErrorCategory::parse, what + ": log range needs same-sign nonzero bounds");
    }
    const double sign = from < 0 ? -1.0 : 1.0;
    const double la = std::log(std::abs(from)), lb = std::log(std::abs(to));
    for (long i = 0; i < count; ++i) {
      values[static_cast<std::size_t>(i)] =
          sign * std::exp(la + (lb - la) * static_cast<double>(i) / (count - 1));
    }
  } else if (mode == "lin") {
    for (long i = 0; i < count; ++i) {
      values[static_cast<std::size_t>(i)] =
          from + (to - from) * static_cast<double>(i) / (count - 1);
    }
  } else {
    throw Error(ErrorCategory::parse, what + ": mode must be lin or log");
  }
  return values;
}

int cmd_sweep(const CommonArgs& args, const std::string& lt_range,
              const std::string& lc_range, const std::string& method,
              int threads, int argc, char** argv) {
  std::vector<std::string> warnings;
  Scenario s = resolve_scenario(args, warnings);
  const fs::path dir = prepare_out_dir(args, "sweep");
  json man = manifest_base("sweep", s, warnings, argc, argv);

  const auto lt = parse_range(lt_range, "--lt-range");
  const auto lc = parse_range(lc_range, "--lc-range");
  SweepOptions opts;
  opts.method = method == "sim" ? SweepMethod::simulation : SweepMethod::eigenvalue;
  opts.sensor = s.observer.gains.sensor;
  opts.init_cs = s.observer.init_cs;
  opts.period = s.sampling_period;
  opts.dry_threshold = s.threshold;
  opts.threads = threads;
  const auto cells = design_space_sweep(lt, lc, s.params, s.shelf, opts);

  std::ostringstream csv;
  write_sweep_csv(csv, cells);
  write_file((dir / "sweep.csv").string(), csv.str());

  double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  int stable_cells = 0;
  for (const auto& c : cells) {
    if (c.stable && std::isfinite(c.conv_time_s)) {
      ++stable_cells;
      tmin = std::min(tmin, c.conv_time_s);
      tmax = std::max(tmax, c.conv_time_s);
    }
  }
  man["results"]["stable_cells"] = stable_cells;
  if (stable_cells > 0) {
    man["results"]["conv_time_min_s"] = tmin;
    man["results"]["conv_time_max_s"] = tmax;
  }
  man["outputs"]["sweep"] = "sweep.csv";
  finish(dir, s, man);
  return 0;
}

int cmd_control(const CommonArgs& args, std::optional<double> gain_K,
                std::optional<double> t_up, const std::string& feedback,
                bool no_observer, bool baseline, int argc, char** argv) {
  std::vector<std::string> warnings;
  Scenario s = resolve_scenario(args, warnings);
  if (!s.controller) s.controller.emplace();
  if (gain_K) s.controller->K = *gain_K;
  if (t_up) s.controller->T_up = *t_up;
  const fs::path dir = prepare_out_dir(args, "control");
  json man = manifest_base("control", s, warnings, argc, argv);

  ClosedLoopOptions opts;
  opts.period = s.sampling_period;
  opts.threshold = s.threshold;
  opts.horizon = s.horizon;
  opts.sensor = s.observer.gains.sensor;
  opts.noise_sigma = s.noise_sigma();
  opts.seed = s.seed;
  opts.feedback =
      feedback == "measured" ? ControlFeedback::measurement : ControlFeedback::estimate;
  if (!no_observer) {
    opts.observer = ObserverSetup{scheduled_gains(s, &man), s.observer.init_cs};
  }

  const ClosedLoopResult result = run_closed_loop(s.params, s.shelf, *s.controller, opts);
  {
    std::ostringstream csv;
    write_closed_loop_csv(csv, result);
    write_file((dir / "closed_loop.csv").string(), csv.str());
  }
  if (result.estimate) {
    std::ostringstream csv;
    write_estimate_csv(csv, *result.estimate);
    write_file((dir / "estimate.csv").string(), csv.str());
    man["outputs"]["estimate"] = "estimate.csv";
  }
  double t_peak = 0.0;
  for (std::size_t i = 0; i < result.truth.size(); ++i) {
    t_peak = std::max(t_peak, result.truth.state(i).T.maxCoeff());
  }
  man["results"]["max_product_temperature_K"] = t_peak;
  if (result.drying_time) {
    man["results"]["drying_time_s"] = *result.drying_time;
  } else {
    man["results"]["drying_time_s"] = nullptr;
  }

  if (baseline) {
    MicrowaveController off = *s.controller;
    off.K = 0.0;
    ClosedLoopOptions base_opts = opts;
    base_opts.observer.reset();
    const ClosedLoopResult conv = run_closed_loop(s.params, s.shelf, off, base_opts);
    if (conv.drying_time) {
      man["results"]["conventional_drying_time_s"] = *conv.drying_time;
      if (result.drying_time) {
        man["results"]["drying_time_reduction_s"] = *conv.drying_time - *result.drying_time;
      }
    }
  }
  man["outputs"]["closed_loop"] = "closed_loop.csv";
  finish(dir, s, man);
  return 0;
}

int cmd_calibrate(const CommonArgs& args, const std::string& data_path,
                  const std::string& which, long budget, int argc, char** argv) {
  std::vector<std::string> warnings;
  Scenario s = resolve_scenario(args, warnings);
  const fs::path dir = prepare_out_dir(args, "calibrate");
  json man = manifest_base("calibrate", s, warnings, argc, argv);

  std::ifstream in(data_path);
  if (!in) throw Error(ErrorCategory::io, "cannot read '" + data_path + "'");
  FitProblem problem;
  problem.data.push_back(read_dataset_csv(in, data_path));
  problem.which =
      which == "kinetics" ? FitParameterSet::kinetics : FitParameterSet::heat_transfer;
  problem.base = s.params;
  problem.sched = s.shelf;

  const FitResult result = fit(problem, budget);

  std::ostringstream report;
  report << "fit = " << which << "\n"
         << "evaluations = " << result.evaluations << "\n"
         << "budget_exhausted = " << (result.budget_exhausted ? "yes" : "no") << "\n"
         << "loss = " << format_sig(result.loss) << "\n";
  if (problem.which == FitParameterSet::heat_transfer) {
    report << "h = " << format_sig(result.params.h) << " W/(m2.K)\n";
  } else {
    report << "A = " << format_sig(result.params.A) << " 1/s\n"
           << "E_a = " << format_sig(result.params.E_a) << " J/mol\n";
  }
  write_file((dir / "fit_report.txt").string(), report.str());

  {
    std::ostringstream csv;
    csv << "index,residual\n";
    for (std::size_t i = 0; i < result.residuals.size(); ++i) {
      csv << i << ',' << format_sig(result.residuals[i]) << "\n";
    }
    write_file((dir / "residuals.csv").string(), csv.str());
  }
  man["results"]["loss"] = result.loss;
  man["results"]["evaluations"] = result.evaluations;
  man["results"]["budget_exhausted"] = result.budget_exhausted;
  if (problem.which == FitParameterSet::heat_transfer) {
    man["results"]["h"] = result.params.h;
  } else {
    man["results"]["A"] = result.params.A;
    man["results"]["E_a"] = result.params.E_a;
  }
  man["outputs"]["fit_report"] = "fit_report.txt";
  man["outputs"]["residuals"] = "residuals.csv";
  finish(dir, s, man);
  return 0;
}

int category_exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::parse:
    case ErrorCategory::validation:
    case ErrorCategory::invalid_parameter:
    case ErrorCategory::invalid_state:
    case ErrorCategory::shape_mismatch:
      return 2;
    case ErrorCategory::io:
      return 3;
    default:
      return 4;  // numeric: step_failure, not_reached, decomposition, degenerate
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secdry - desorption-limited drying simulation and state estimation"};
  app.set_version_flag("--version", std::string(SECDRY_VERSION));
  app.require_subcommand(1);

  CommonArgs sim_args, obs_args, des_args, swp_args, ctl_args, cal_args;

  auto* sim = app.add_subcommand("simulate", "Integrate the drying model");
  add_common(sim, sim_args);
  std::optional<double> until_dry, sim_horizon;
  sim->add_option("--until-dry", until_dry, "Stop when c_s_avg reaches this threshold, kg/kg");
  sim->add_option("--horizon", sim_horizon, "Integration horizon, s");

  auto* obs = app.add_subcommand("observe", "Run the state observer");
  add_common(obs, obs_args);
  std::string meas_path;
  std::optional<double> obs_horizon;
  obs->add_option("--measurements", meas_path, "Measurement CSV (default: simulate truth)");
  obs->add_option("--horizon", obs_horizon, "Truth horizon, s");

  auto* des = app.add_subcommand("design", "Linearized observer analysis");
  add_common(des, des_args);

  auto* swp = app.add_subcommand("sweep", "Gain design-space sweep");
  add_common(swp, swp_args);
  std::string lt_range, lc_range, sweep_method = "eig";
  int sweep_threads = 0;
  swp->add_option("--lt-range", lt_range, "L_T values from:to:count[:lin|log]")->required();
  swp->add_option("--lc-range", lc_range, "L_c values from:to:count[:lin|log]")->required();
  swp->add_option("--method", sweep_method, "Per-cell method: eig | sim")
      ->check(CLI::IsMember({"eig", "sim"}));
  swp->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");

  auto* ctl = app.add_subcommand("control", "Closed-loop microwave control");
  add_common(ctl, ctl_args);
  std::optional<double> ctl_K, ctl_Tup;
  std::string feedback = "estimate";
  bool no_observer = false, baseline = false;
  ctl->add_option("--K", ctl_K, "Controller gain, W/(m3.K)");
  ctl->add_option("--T-up", ctl_Tup, "Upper temperature limit, K");
  ctl->add_option("--feedback", feedback, "T_max source: estimate | measured")
      ->check(CLI::IsMember({"estimate", "measured"}));
  ctl->add_flag("--no-observer", no_observer, "Run without the observer in the loop");
  ctl->add_flag("--baseline", baseline, "Also run the conventional (K = 0) case");

  auto* cal = app.add_subcommand("calibrate", "Fit h or (A, E_a) to data");
  add_common(cal, cal_args);
  std::string data_path, which = "h";
  long budget = 2000;
  cal->add_option("--data", data_path, "Dataset CSV t_s,<channel>")->required();
  cal->add_option("--fit", which, "Free parameters: h | kinetics")
      ->check(CLI::IsMember({"h", "kinetics"}));
  cal->add_option("--budget", budget, "Maximum model evaluations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_args, until_dry, sim_horizon, argc, argv);
    if (obs->parsed()) return cmd_observe(obs_args, meas_path, obs_horizon, argc, argv);
    if (des->parsed()) return cmd_design(des_args, argc, argv);
    if (swp->parsed()) {
      return cmd_sweep(swp_args, lt_range, lc_range, sweep_method, sweep_threads, argc, argv);
    }
    if (ctl->parsed()) {
      return cmd_control(ctl_args, ctl_K, ctl_Tup, feedback, no_observer, baseline, argc, argv);
    }
    if (cal->parsed()) return cmd_calibrate(cal_args, data_path, which, budget, argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return category_exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
