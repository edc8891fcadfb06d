#include "secdry/control.hpp"

#include <algorithm>
#include <cmath>

#include "secdry/rng.hpp"

namespace secdry {

double microwave_power(const Vec& T_field, const MicrowaveController& ctl) {
  if (ctl.K < 0.0 || !(ctl.T_up > 0.0)) {
    throw Error(ErrorCategory::invalid_parameter, "controller needs K >= 0 and T_up > 0");
  }
  if (T_field.size() == 0 || !T_field.allFinite()) {
    throw Error(ErrorCategory::invalid_state, "temperature field invalid");
  }
  return std::max(0.0, ctl.K * (ctl.T_up - T_field.maxCoeff()));
}

ClosedLoopResult run_closed_loop(const ModelParameters& p, const ShelfSchedule& sched,
                                 const MicrowaveController& ctl,
                                 const ClosedLoopOptions& opts) {
  validate(p);
  validate(sched);
  if (!(opts.period > 0.0)) {
    throw Error(ErrorCategory::invalid_parameter, "control period must be > 0");
  }
  const Grid grid = build_grid(p);
  const int m = grid.m;
  const double t_cap = shelf_cap_time(sched);

  ClosedLoopResult out;
  out.truth = Trajectory(m);

  Vec x_true = initial_state(p).stacked();
  double q_v_now = 0.0;
  const OdeSystem plant{
      [&](double t, const Vec& x, Vec& dxdt) {
        model_rhs(x, ControlInput{shelf_temperature(t, sched), q_v_now}, p, grid, dxdt);
      },
      [&](double, const Vec& x, Mat& J) { model_jacobian(x, p, grid, J); },
  };
  Vec corr = Vec::Zero(2 * m);
  const OdeSystem observer_fb{
      [&](double t, const Vec& x, Vec& dxdt) {
        plant.f(t, x, dxdt);
        dxdt += corr;
      },
      plant.jacobian,
  };

  Rng rng(opts.seed);
  const int channels = opts.sensor == SensorKind::full_field ? m : 1;

  Vec xhat;
  if (opts.observer) {
    out.estimate.emplace();
    out.estimate->sensor = opts.sensor;
  }

  double h_true = 0.0, h_obs = 0.0;
  const auto max_samples =
      static_cast<std::size_t>(std::floor(opts.horizon / opts.period)) + 1;

  for (std::size_t k = 0; k < max_samples; ++k) {
    const double t_k = static_cast<double>(k) * opts.period;

    // measure
    Vec y(channels);
    if (opts.sensor == SensorKind::full_field) {
      for (int i = 0; i < m; ++i) {
        y[i] = x_true[i] + (opts.noise_sigma > 0.0 ? rng.next_noise(opts.noise_sigma) : 0.0);
      }
    } else {
      y[0] = x_true[m - 1] + (opts.noise_sigma > 0.0 ? rng.next_noise(opts.noise_sigma) : 0.0);
    }

    // initialize / record observer
    if (opts.observer) {
      if (k == 0) {
        Vec T0(m);
        if (opts.sensor == SensorKind::full_field) {
          T0 = y;
        } else {
          T0.setConstant(y[0]);
        }
        xhat = Vec(2 * m);
        xhat << T0, Vec::Constant(m, opts.observer->init_cs);
        out.estimate->T_hat.resize(m, static_cast<Eigen::Index>(max_samples));
        out.estimate->c_s_hat.resize(m, static_cast<Eigen::Index>(max_samples));
        out.estimate->innovation.resize(channels, static_cast<Eigen::Index>(max_samples));
      }
      out.estimate->times.push_back(t_k);
      const auto j = static_cast<Eigen::Index>(k);
      out.estimate->T_hat.col(j) = xhat.head(m);
      out.estimate->c_s_hat.col(j) = xhat.tail(m);
      if (opts.sensor == SensorKind::full_field) {
        out.estimate->innovation.col(j) = xhat.head(m) - y;
      } else {
        out.estimate->innovation(0, j) = xhat[m - 1] - y[0];
      }
    }

    // controller input
    Vec T_ctrl;
    if (opts.feedback == ControlFeedback::estimate && opts.observer) {
      T_ctrl = xhat.head(m);
    } else {
      T_ctrl = y;  // measured channels (single bottom value for a point sensor)
    }
    q_v_now = microwave_power(T_ctrl, ctl);

    out.times.push_back(t_k);
    out.Q_v.push_back(q_v_now);
    out.T_max.push_back(x_true.head(m).maxCoeff());

    // record truth node
    if (out.truth.empty()) {
      Vec f0(2 * m);
      plant.f(t_k, x_true, f0);
      out.truth.append(t_k, x_true, f0);
    }

    if (x_true.tail(m).mean() <= opts.threshold) break;
    if (k + 1 == max_samples) break;

    // advance plant and observer over [t_k, t_k + period] with frozen Q_v
    const double t_next = t_k + opts.period;
    auto advance = [&](const OdeSystem& sys, Vec x, double& h_hint, Trajectory* rec) {
      if (t_cap > t_k && t_cap < t_next) {
        auto r1 = integrate_interval(sys, t_k, t_cap, std::move(x), opts.settings, h_hint, rec);
        auto r2 = integrate_interval(sys, t_cap, t_next, std::move(r1.x), opts.settings,
                                     r1.last_step, rec);
        h_hint = r2.last_step;
        return std::move(r2.x);
      }
      auto r = integrate_interval(sys, t_k, t_next, std::move(x), opts.settings, h_hint, rec);
      h_hint = r.last_step;
      return std::move(r.x);
    };

    x_true = advance(plant, std::move(x_true), h_true, &out.truth);

    if (opts.observer) {
      const ObserverGains& g = gains_at(opts.observer->gains, t_k);
      double s;
      if (opts.sensor == SensorKind::full_field) {
        s = (xhat.head(m) - y).sum();
      } else {
        s = xhat[m - 1] - y[0];
      }
      corr.head(m).setConstant(g.L_T * s);
      corr.tail(m).setConstant(g.L_c * s);
      xhat = advance(observer_fb, std::move(xhat), h_obs, nullptr);
      xhat.tail(m) = xhat.tail(m).cwiseMax(0.0);
    }
  }

  // trim the estimate record to the samples actually taken
  if (out.estimate) {
    const auto n = static_cast<Eigen::Index>(out.estimate->times.size());
    out.estimate->T_hat.conservativeResize(Eigen::NoChange, n);
    out.estimate->c_s_hat.conservativeResize(Eigen::NoChange, n);
    out.estimate->innovation.conservativeResize(Eigen::NoChange, n);
  }

  if (const auto t_dry = first_time_below(out.truth, opts.threshold)) {
    out.truth.truncate(*t_dry);
    out.drying_time = *t_dry;
  }
  return out;
}

}  // namespace secdry
