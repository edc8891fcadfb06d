#include "secdry/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "secdry/rng.hpp"

namespace secdry {

const char* to_string(SensorKind k) {
  return k == SensorKind::full_field ? "full" : "bottom";
}

ControlPolicy shelf_only_policy(const ShelfSchedule& sched) {
  return [sched](double t) { return ControlInput{shelf_temperature(t, sched), 0.0}; };
}

namespace {

OdeSystem make_system(const ModelParameters& p, const Grid& grid,
                      const ControlPolicy& policy) {
  return OdeSystem{
      [&p, grid, policy](double t, const Vec& x, Vec& dxdt) {
        model_rhs(x, policy(t), p, grid, dxdt);
      },
      [&p, grid](double, const Vec& x, Mat& J) { model_jacobian(x, p, grid, J); },
  };
}

}  // namespace

Trajectory integrate(const ModelParameters& p, const ShelfSchedule& sched,
                     const ControlPolicy& u_policy, double t0, double t1,
                     const IntegratorSettings& settings) {
  validate(p);
  validate(sched);
  if (!(t1 >= t0)) {
    throw Error(ErrorCategory::invalid_parameter, "empty integration span");
  }
  const Grid grid = build_grid(p);
  const ControlPolicy policy = u_policy ? u_policy : shelf_only_policy(sched);
  const OdeSystem sys = make_system(p, grid, policy);

  Trajectory traj(grid.m);
  Vec x = initial_state(p).stacked();
  const double t_cap = shelf_cap_time(sched);
  double h_hint = 0.0;
  double t = t0;
  if (t_cap > t0 && t_cap < t1) {
    auto r = integrate_interval(sys, t0, t_cap, std::move(x), settings, 0.0, &traj);
    x = std::move(r.x);
    h_hint = r.last_step;
    t = t_cap;
  }
  auto r = integrate_interval(sys, t, t1, std::move(x), settings, h_hint, &traj);
  (void)r;
  return traj;
}

DryingResult run_until_dry(const ModelParameters& p, const ShelfSchedule& sched,
                           double threshold, const IntegratorSettings& settings,
                           double horizon) {
  if (!(threshold > 0.0)) {
    throw Error(ErrorCategory::invalid_parameter, "drying threshold must be > 0");
  }
  validate(p);
  validate(sched);
  const Grid grid = build_grid(p);
  const ControlPolicy policy = shelf_only_policy(sched);
  const OdeSystem sys = make_system(p, grid, policy);

  Trajectory traj(grid.m);
  Vec x = initial_state(p).stacked();
  {
    Vec f0(2 * grid.m);
    sys.f(0.0, x, f0);
    traj.append(0.0, x, f0);
  }
  if (traj.c_s_avg().front() <= threshold) {
    return DryingResult{std::move(traj), 0.0};
  }

  // March in growing chunks, stopping once the threshold is crossed; split
  // at the shelf cap where the input has a kink.
  const double t_cap = shelf_cap_time(sched);
  double t = 0.0;
  double chunk = 1800.0;
  double h_hint = 0.0;
  while (t < horizon) {
    double t_next = std::min(t + chunk, horizon);
    if (t < t_cap && t_next > t_cap) t_next = t_cap;
    const std::size_t node_before = traj.size();
    auto r = integrate_interval(sys, t, t_next, std::move(x), settings, h_hint, &traj);
    x = std::move(r.x);
    h_hint = r.last_step;
    t = t_next;
    chunk = std::min(chunk * 2.0, 4.0 * 3600.0);

    const auto& cavg = traj.c_s_avg();
    for (std::size_t i = node_before; i < traj.size(); ++i) {
      if (cavg[i] <= threshold) {
        // bisect inside [times[i-1], times[i]] on the dense output
        double lo = traj.times()[i - 1];
        double hi = traj.times()[i];
        while (hi - lo > 1e-3) {
          const double mid = 0.5 * (lo + hi);
          (traj.c_s_avg_at(mid) <= threshold ? hi : lo) = mid;
        }
        traj.truncate(hi);
        return DryingResult{std::move(traj), hi};
      }
    }
  }
  throw Error(ErrorCategory::not_reached,
              "c_s_avg did not reach threshold within the horizon");
}

std::optional<double> first_time_below(const Trajectory& traj, double threshold) {
  const auto& cavg = traj.c_s_avg();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (cavg[i] <= threshold) {
      if (i == 0) return traj.times().front();
      double lo = traj.times()[i - 1];
      double hi = traj.times()[i];
      while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        (traj.c_s_avg_at(mid) <= threshold ? hi : lo) = mid;
      }
      return hi;
    }
  }
  return std::nullopt;
}

MeasurementSeries sample_measurements(const Trajectory& traj, double period,
                                      SensorKind sensor, double noise_sigma,
                                      std::uint64_t seed) {
  if (!(period > 0.0)) {
    throw Error(ErrorCategory::invalid_parameter, "sampling period must be > 0");
  }
  if (traj.empty() || traj.end_time() - traj.start_time() < period) {
    throw Error(ErrorCategory::invalid_parameter,
                "trajectory must span at least one sampling period");
  }
  const int m = traj.cells();
  const double t0 = traj.start_time();
  const auto n_samples =
      static_cast<std::size_t>(std::floor((traj.end_time() - t0) / period + 1e-9)) + 1;

  MeasurementSeries series;
  series.sensor = sensor;
  series.period = period;
  series.noise_sigma = noise_sigma;
  series.seed = seed;
  series.times.resize(n_samples);
  const int channels = sensor == SensorKind::full_field ? m : 1;
  series.values.resize(channels, static_cast<Eigen::Index>(n_samples));

  Rng rng(seed);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = t0 + static_cast<double>(k) * period;
    series.times[k] = t;
    const Vec x = traj.at(t);
    if (sensor == SensorKind::full_field) {
      for (int i = 0; i < m; ++i) {
        const double n = noise_sigma > 0.0 ? rng.next_noise(noise_sigma) : 0.0;
        series.values(i, static_cast<Eigen::Index>(k)) = x[i] + n;
      }
    } else {
      const double n = noise_sigma > 0.0 ? rng.next_noise(noise_sigma) : 0.0;
      series.values(0, static_cast<Eigen::Index>(k)) = x[m - 1] + n;
    }
  }
  return series;
}

}  // namespace secdry
