#ifndef SECDRY_OBSERVER_HPP
#define SECDRY_OBSERVER_HPP

#include <optional>
#include <variant>

#include "secdry/simulate.hpp"

namespace secdry {

/// Scalar Luenberger gains. For a full-field sensor the gain matrices are
/// L_T J_m and L_c J_m (J_m the m x m matrix of ones); for a bottom-point
/// sensor they are L_T and L_c times the vector of ones. Units: L_T in 1/s,
/// L_c in kg water/(kg solid K s).
struct ObserverGains {
  double L_T = -1e-6;
  double L_c = 5e-7;
  SensorKind sensor = SensorKind::full_field;

  friend bool operator==(const ObserverGains&, const ObserverGains&) = default;
};

/// Default gains for the two sensor layouts.
ObserverGains default_gains(SensorKind sensor);

/// Warns (does not throw) when the full-field sign conventions L_T <= 0,
/// L_c >= 0 are violated.
std::vector<std::string> validate(const ObserverGains& g);

/// High gains until switch_time, reduced gains afterwards (single hard
/// switch).
struct GainSchedule {
  ObserverGains initial;
  ObserverGains reduced;
  double switch_time = 0.0;  ///< s, > 0
};

using GainsOrSchedule = std::variant<ObserverGains, GainSchedule>;

/// Gains in effect at time t.
const ObserverGains& gains_at(const GainsOrSchedule& g, double t);

/// Estimated state sequence at the measurement instants, with the innovation
/// (y_hat - y) recorded per sample and channel.
struct EstimateTrajectory {
  std::vector<double> times;
  Mat T_hat;         ///< m x N estimated temperatures
  Mat c_s_hat;       ///< m x N estimated concentrations
  Mat innovation;    ///< channels x N
  SensorKind sensor = SensorKind::full_field;

  std::size_t size() const { return times.size(); }
  ProductState state(std::size_t i) const {
    const auto j = static_cast<Eigen::Index>(i);
    return ProductState{T_hat.col(j), c_s_hat.col(j)};
  }
  double c_s_avg(std::size_t i) const { return c_s_hat.col(static_cast<Eigen::Index>(i)).mean(); }
  double T_avg(std::size_t i) const { return T_hat.col(static_cast<Eigen::Index>(i)).mean(); }
};

/// Observer right-hand side: the model dynamics plus the innovation
/// feedback. y_sample must have m entries (full-field) or 1 (bottom-point).
/// With zero gains this is exactly the model rhs.
ProductState observer_rhs(const ProductState& est, const Vec& y_sample,
                          const ObserverGains& gains, const ControlInput& u,
                          const ModelParameters& p, const Grid& grid);

/// Builds the default initial estimate from the first measurement: the
/// estimated temperature is set to the measured value (replicated across
/// cells for a point sensor) and the concentration to init_cs.
ProductState default_initial_estimate(const MeasurementSeries& meas, int m,
                                      double init_cs);

/// Options for run_observer. The control input seen by the observer is
/// shelf heating plus an optional externally applied Q_v (ZOH per interval).
struct ObserverRunOptions {
  IntegratorSettings settings;
  std::vector<double> q_v;  ///< optional per-interval volumetric heating, W/m^3
};

/// Runs the observer over a measurement series. Between samples the
/// innovation is held at its most recent value (zero-order hold) and the
/// observer ODE is integrated with the same implicit scheme as the model;
/// the estimated concentration is floored at 0 after every interval.
EstimateTrajectory run_observer(const MeasurementSeries& meas,
                                const GainsOrSchedule& gains,
                                const ProductState& init_est,
                                const ModelParameters& p,
                                const ShelfSchedule& sched,
                                const ObserverRunOptions& opts = {});

/// Elementwise and averaged estimation errors against a truth trajectory
/// (truth linearly interpolated in time at the estimate instants).
struct ErrorSeries {
  std::vector<double> times;
  Mat e_T;  ///< m x N, |T_hat - T|
  Mat e_c;  ///< m x N, |c_s_hat - c_s|
  std::vector<double> e_T_avg;
  std::vector<double> e_c_avg;
  double initial_error = 0.0;  ///< e_c_avg at the first instant

  /// First time e_c_avg falls below max(2% of its initial value, floor) and
  /// stays below for the remainder of the series; empty if never.
  std::optional<double> convergence_time;
};

ErrorSeries estimation_errors(const EstimateTrajectory& est, const Trajectory& truth,
                              double convergence_floor = 1e-5);

/// Truth state at time t by linear interpolation between stored nodes.
Vec linear_sample(const Trajectory& truth, double t);

}  // namespace secdry

#endif  // SECDRY_OBSERVER_HPP
