#ifndef SECDRY_CONTROL_HPP
#define SECDRY_CONTROL_HPP

#include <optional>

#include "secdry/observer.hpp"

namespace secdry {

/// Proportional microwave-power law Q_v = max(0, K (T_up - T_max)); the
/// actuator heats only, so negative demands are clamped to zero.
struct MicrowaveController {
  double K = 1000.0;     ///< gain, W/(m^3 K)
  double T_up = 313.15;  ///< upper product temperature limit, K

  friend bool operator==(const MicrowaveController&, const MicrowaveController&) = default;
};

double microwave_power(const Vec& T_field, const MicrowaveController& ctl);

/// Source of the controller's T_max signal.
enum class ControlFeedback {
  estimate,     ///< observer's estimated field (default; falls back to the
                ///< measurement when no observer is configured)
  measurement,  ///< measured channels directly
};

struct ObserverSetup {
  GainsOrSchedule gains = ObserverGains{};
  double init_cs = 0.0314;
};

struct ClosedLoopOptions {
  double period = 10.0;            ///< ZOH actuation/sampling interval, s
  double threshold = 0.01;         ///< stop when the true c_s_avg reaches this
  double horizon = 48.0 * 3600.0;  ///< s
  SensorKind sensor = SensorKind::full_field;
  double noise_sigma = 0.0;        ///< measurement noise std dev, K
  std::uint64_t seed = 0;
  ControlFeedback feedback = ControlFeedback::estimate;
  std::optional<ObserverSetup> observer;
  IntegratorSettings settings;
};

struct ClosedLoopResult {
  Trajectory truth;                          ///< dense true trajectory (truncated at drying)
  std::vector<double> times;                 ///< sample instants
  std::vector<double> Q_v;                   ///< power held over [t_k, t_{k+1}), W/m^3
  std::vector<double> T_max;                 ///< true max product temperature at t_k, K
  std::optional<EstimateTrajectory> estimate;
  std::optional<double> drying_time;         ///< empty if threshold not reached in horizon
};

/// Co-simulates the plant and (optionally) the observer under sampled
/// proportional microwave control: at every sample instant the controller
/// reads T_max from the configured feedback source, sets Q_v, and holds it
/// until the next instant. The shelf schedule stays continuous.
ClosedLoopResult run_closed_loop(const ModelParameters& p, const ShelfSchedule& sched,
                                 const MicrowaveController& ctl,
                                 const ClosedLoopOptions& opts);

}  // namespace secdry

#endif  // SECDRY_CONTROL_HPP
