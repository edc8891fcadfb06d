#include "secdry/observer.hpp"

#include <algorithm>
#include <cmath>

namespace secdry {

ObserverGains default_gains(SensorKind sensor) {
  if (sensor == SensorKind::full_field) return {-1e-6, 5e-7, sensor};
  return {-5e-3, 1e-4, sensor};
}

std::vector<std::string> validate(const ObserverGains& g) {
  std::vector<std::string> warnings;
  if (g.L_T > 0.0) {
    warnings.push_back("L_T > 0 inverts the temperature feedback sign convention");
  }
  if (g.L_c < 0.0) {
    warnings.push_back("L_c < 0 inverts the concentration feedback sign convention");
  }
  return warnings;
}

const ObserverGains& gains_at(const GainsOrSchedule& g, double t) {
  if (const auto* sched = std::get_if<GainSchedule>(&g)) {
    return t >= sched->switch_time ? sched->reduced : sched->initial;
  }
  return std::get<ObserverGains>(g);
}

namespace {

int expected_channels(SensorKind s, int m) {
  return s == SensorKind::full_field ? m : 1;
}

/// Scalar innovation sum driving the ones-structured correction:
/// sum_j (T_hat_j - y_j) for a full-field sensor, T_hat_m - y for a point
/// sensor.
double innovation_sum(const Vec& T_hat, const Vec& y, SensorKind sensor) {
  if (sensor == SensorKind::full_field) return (T_hat - y).sum();
  return T_hat[T_hat.size() - 1] - y[0];
}

}  // namespace

ProductState observer_rhs(const ProductState& est, const Vec& y_sample,
                          const ObserverGains& gains, const ControlInput& u,
                          const ModelParameters& p, const Grid& grid) {
  if (y_sample.size() != expected_channels(gains.sensor, grid.m)) {
    throw Error(ErrorCategory::shape_mismatch,
                "measurement has " + std::to_string(y_sample.size()) +
                    " channels, sensor expects " +
                    std::to_string(expected_channels(gains.sensor, grid.m)));
  }
  ProductState d = rhs(est, u, p, grid);
  const double s = innovation_sum(est.T, y_sample, gains.sensor);
  d.T.array() += gains.L_T * s;
  d.c_s.array() += gains.L_c * s;
  return d;
}

ProductState default_initial_estimate(const MeasurementSeries& meas, int m,
                                      double init_cs) {
  if (meas.size() == 0) {
    throw Error(ErrorCategory::invalid_parameter, "empty measurement series");
  }
  Vec T0(m);
  if (meas.sensor == SensorKind::full_field) {
    T0 = meas.sample(0);
  } else {
    T0.setConstant(meas.values(0, 0));
  }
  return ProductState{std::move(T0), Vec::Constant(m, init_cs)};
}

EstimateTrajectory run_observer(const MeasurementSeries& meas,
                                const GainsOrSchedule& gains,
                                const ProductState& init_est,
                                const ModelParameters& p,
                                const ShelfSchedule& sched,
                                const ObserverRunOptions& opts) {
  validate(p);
  validate(sched);
  const Grid grid = build_grid(p);
  const int m = grid.m;
  const auto n = meas.size();
  if (n == 0) {
    throw Error(ErrorCategory::invalid_parameter, "empty measurement series");
  }
  if (meas.channels() != expected_channels(meas.sensor, m)) {
    throw Error(ErrorCategory::shape_mismatch, "measurement channel count vs sensor kind");
  }
  check_state(init_est);
  if (init_est.size() != m) {
    throw Error(ErrorCategory::shape_mismatch, "initial estimate size vs grid");
  }
  if (!opts.q_v.empty() && opts.q_v.size() < n - 1) {
    throw Error(ErrorCategory::shape_mismatch, "q_v series shorter than interval count");
  }

  EstimateTrajectory out;
  out.sensor = meas.sensor;
  out.times = meas.times;
  out.T_hat.resize(m, static_cast<Eigen::Index>(n));
  out.c_s_hat.resize(m, static_cast<Eigen::Index>(n));
  out.innovation.resize(meas.channels(), static_cast<Eigen::Index>(n));

  Vec x = init_est.stacked();
  const double t_cap = shelf_cap_time(sched);
  Vec corr(2 * m);
  double h_hint = 0.0;

  // ZOH correction is constant inside an interval, so the observer shares
  // the model Jacobian.
  double q_v_now = 0.0;
  ShelfSchedule sched_local = sched;
  const OdeSystem sys{
      [&](double t, const Vec& xx, Vec& dxdt) {
        model_rhs(xx, ControlInput{shelf_temperature(t, sched_local), q_v_now}, p, grid, dxdt);
        dxdt += corr;
      },
      [&](double, const Vec& xx, Mat& J) { model_jacobian(xx, p, grid, J); },
  };

  for (std::size_t k = 0; k < n; ++k) {
    out.T_hat.col(static_cast<Eigen::Index>(k)) = x.head(m);
    out.c_s_hat.col(static_cast<Eigen::Index>(k)) = x.tail(m);
    const Vec y = meas.sample(k);
    if (meas.sensor == SensorKind::full_field) {
      out.innovation.col(static_cast<Eigen::Index>(k)) = x.head(m) - y;
    } else {
      out.innovation(0, static_cast<Eigen::Index>(k)) = x[m - 1] - y[0];
    }
    if (k + 1 == n) break;

    const double t0 = meas.times[k];
    const double t1 = meas.times[k + 1];
    const ObserverGains& g = gains_at(gains, t0);
    const double s = innovation_sum(x.head(m), y, meas.sensor);
    corr.head(m).setConstant(g.L_T * s);
    corr.tail(m).setConstant(g.L_c * s);
    q_v_now = opts.q_v.empty() ? 0.0 : opts.q_v[k];

    if (t_cap > t0 && t_cap < t1) {
      auto r1 = integrate_interval(sys, t0, t_cap, std::move(x), opts.settings, h_hint);
      auto r2 = integrate_interval(sys, t_cap, t1, std::move(r1.x), opts.settings, r1.last_step);
      x = std::move(r2.x);
      h_hint = r2.last_step;
    } else {
      auto r = integrate_interval(sys, t0, t1, std::move(x), opts.settings, h_hint);
      x = std::move(r.x);
      h_hint = r.last_step;
    }
    // unphysical negative concentration estimates are floored
    x.tail(m) = x.tail(m).cwiseMax(0.0);
  }
  return out;
}

Vec linear_sample(const Trajectory& truth, double t) {
  const auto& ts = truth.times();
  if (ts.empty()) throw Error(ErrorCategory::invalid_state, "empty trajectory");
  if (t <= ts.front()) return truth.stacked(0);
  if (t >= ts.back()) return truth.stacked(truth.size() - 1);
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
  const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
  return (1.0 - w) * truth.stacked(i) + w * truth.stacked(i + 1);
}

ErrorSeries estimation_errors(const EstimateTrajectory& est, const Trajectory& truth,
                              double convergence_floor) {
  const auto n = est.size();
  if (n == 0) throw Error(ErrorCategory::invalid_parameter, "empty estimate trajectory");
  const int m = truth.cells();
  if (est.T_hat.rows() != m) {
    throw Error(ErrorCategory::shape_mismatch, "estimate and truth grid sizes differ");
  }
  // linear_sample clamps at the ends; tolerate instants marginally past the
  // truth span (an event-truncated truth can end just inside the final
  // sampling interval), reject real misalignment
  if (est.times.front() < truth.start_time() - 1e-9 ||
      est.times.back() > truth.end_time() + 60.0) {
    throw Error(ErrorCategory::invalid_parameter,
                "estimate instants outside the truth trajectory span");
  }

  ErrorSeries err;
  err.times = est.times;
  err.e_T.resize(m, static_cast<Eigen::Index>(n));
  err.e_c.resize(m, static_cast<Eigen::Index>(n));
  err.e_T_avg.resize(n);
  err.e_c_avg.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec x = linear_sample(truth, est.times[k]);
    const auto j = static_cast<Eigen::Index>(k);
    err.e_T.col(j) = (est.T_hat.col(j) - x.head(m)).cwiseAbs();
    err.e_c.col(j) = (est.c_s_hat.col(j) - x.tail(m)).cwiseAbs();
    err.e_T_avg[k] = err.e_T.col(j).mean();
    err.e_c_avg[k] = err.e_c.col(j).mean();
  }
  err.initial_error = err.e_c_avg.front();

  const double threshold = std::max(0.02 * err.initial_error, convergence_floor);
  std::size_t first_ok = n;  // first index from which e_c_avg stays below
  for (std::size_t k = n; k-- > 0;) {
    if (err.e_c_avg[k] <= threshold) {
      first_ok = k;
    } else {
      break;
    }
  }
  if (first_ok < n) err.convergence_time = err.times[first_ok];
  return err;
}

}  // namespace secdry
