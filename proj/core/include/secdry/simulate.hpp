#ifndef SECDRY_SIMULATE_HPP
#define SECDRY_SIMULATE_HPP

#include <cstdint>
#include <functional>
#include <optional>

#include "secdry/integrate.hpp"
#include "secdry/model.hpp"

namespace secdry {

enum class SensorKind { full_field, bottom_point };

const char* to_string(SensorKind k);

/// Maps simulation time to the applied control input.
using ControlPolicy = std::function<ControlInput(double)>;

/// Shelf heating only: u(t) = (T_b(t), 0).
ControlPolicy shelf_only_policy(const ShelfSchedule& sched);

/// Integrates the model over [t0, t1] from the uniform initial state
/// (Table-style T_0, c_s0), splitting the step sequence at the shelf-ramp
/// cap where the input has a slope discontinuity. Pass a null policy for
/// shelf-only heating.
Trajectory integrate(const ModelParameters& p, const ShelfSchedule& sched,
                     const ControlPolicy& u_policy, double t0, double t1,
                     const IntegratorSettings& settings);

struct DryingResult {
  Trajectory trajectory;  ///< truncated at the drying time
  double drying_time;     ///< first t with c_s_avg <= threshold, s
};

/// Runs until the average concentration first reaches `threshold`,
/// located on the dense output by bisection (well below 1 s accuracy).
/// Throws Error{not_reached} if the threshold is not attained by `horizon`.
DryingResult run_until_dry(const ModelParameters& p, const ShelfSchedule& sched,
                           double threshold, const IntegratorSettings& settings,
                           double horizon = 48.0 * 3600.0);

/// First time c_s_avg drops to `threshold` on a recorded trajectory
/// (bisected on the dense output), or empty if it never does.
std::optional<double> first_time_below(const Trajectory& traj, double threshold);

/// Uniformly sampled temperature outputs, optionally noisy.
/// values has one row per channel: m rows for a full-field sensor,
/// one row (the bottom temperature T_p) for a point sensor.
struct MeasurementSeries {
  std::vector<double> times;
  Mat values;
  SensorKind sensor = SensorKind::full_field;
  double period = 10.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  int channels() const { return static_cast<int>(values.rows()); }
  std::size_t size() const { return times.size(); }
  Vec sample(std::size_t i) const { return values.col(static_cast<Eigen::Index>(i)); }
};

/// Samples the trajectory every `period` seconds from its start time
/// (dense-output interpolation) and adds i.i.d. Gaussian noise of standard
/// deviation noise_sigma per scalar channel, truncated at +/- 6 sigma.
/// Bit-deterministic for a fixed seed.
MeasurementSeries sample_measurements(const Trajectory& traj, double period,
                                      SensorKind sensor, double noise_sigma,
                                      std::uint64_t seed);

}  // namespace secdry

#endif  // SECDRY_SIMULATE_HPP
