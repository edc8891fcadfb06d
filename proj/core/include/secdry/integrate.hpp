#ifndef SECDRY_INTEGRATE_HPP
#define SECDRY_INTEGRATE_HPP

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "secdry/types.hpp"

namespace secdry {

/// Tolerances for the adaptive implicit integrator. Absolute tolerances are
/// per state block: the stacked vector is [T (K); c_s (kg/kg)].
struct IntegratorSettings {
  double rel_tol = 1e-6;
  double abs_tol_T = 1e-6;
  double abs_tol_c = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 5'000'000;
};

/// Right-hand side and Jacobian callbacks for a stacked-state ODE system.
/// The Jacobian must not depend on t explicitly (true for this model: the
/// shelf temperature enters affinely).
struct OdeSystem {
  std::function<void(double t, const Vec& x, Vec& dxdt)> f;
  std::function<void(double t, const Vec& x, Mat& jac)> jacobian;
};

/// Time-ordered dense record of an integration: states and derivatives at
/// accepted step ends, interpolated between steps with cubic Hermite
/// polynomials. Also caches the per-node field averages.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(int cells) : m_(cells) {}

  int cells() const { return m_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

  const Vec& stacked(std::size_t i) const { return states_[i]; }
  ProductState state(std::size_t i) const { return ProductState::from_stacked(states_[i]); }
  const std::vector<double>& T_avg() const { return T_avg_; }
  const std::vector<double>& c_s_avg() const { return c_avg_; }

  void append(double t, const Vec& x, const Vec& dxdt);

  /// Cubic Hermite interpolation of the stacked state at time t
  /// (t clamped to the recorded span).
  Vec at(double t) const;
  ProductState state_at(double t) const { return ProductState::from_stacked(at(t)); }
  double c_s_avg_at(double t) const;
  double T_avg_at(double t) const;

  /// Drops every node with time > t_cut and appends the interpolated state
  /// at t_cut as the final node.
  void truncate(double t_cut);

 private:
  std::size_t segment_index(double t) const;

  int m_ = 0;
  std::vector<double> times_;
  std::vector<Vec> states_;
  std::vector<Vec> derivs_;
  std::vector<double> T_avg_;
  std::vector<double> c_avg_;
};

struct IntegrationResult {
  Vec x;             ///< state at the end of the interval
  double last_step;  ///< final accepted step size (reuse as next hint)
  long n_steps;      ///< accepted steps
};

/// Integrates x' = f(t, x) over [t0, t1] with the TR-BDF2 one-step scheme
/// (trapezoid to t + gamma h, BDF2 to t + h, gamma = 2 - sqrt(2)): second
/// order, L-stable, with an embedded third-order error estimate filtered
/// through the stage matrix. Both stages share one LU factorization of
/// I - d h J per step.
///
/// If `record` is non-null, every accepted node is appended to it (including
/// (t0, x0) when the record is empty). `h_hint` seeds the initial step size;
/// pass 0 to auto-select. Throws Error{step_failure} if the tolerance cannot
/// be met above the minimum step size.
IntegrationResult integrate_interval(const OdeSystem& sys, double t0, double t1,
                                     Vec x0, const IntegratorSettings& settings,
                                     double h_hint = 0.0,
                                     Trajectory* record = nullptr);

}  // namespace secdry

#endif  // SECDRY_INTEGRATE_HPP
