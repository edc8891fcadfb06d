#include "secdry/integrate.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "secdry/errors.hpp"

namespace secdry {

void Trajectory::append(double t, const Vec& x, const Vec& dxdt) {
  if (!times_.empty() && !(t > times_.back())) {
    throw Error(ErrorCategory::invalid_state, "trajectory times must be strictly increasing");
  }
  if (m_ == 0) m_ = static_cast<int>(x.size()) / 2;
  times_.push_back(t);
  states_.push_back(x);
  derivs_.push_back(dxdt);
  T_avg_.push_back(x.head(m_).mean());
  c_avg_.push_back(x.tail(m_).mean());
}

std::size_t Trajectory::segment_index(double t) const {
  // index i such that times_[i] <= t <= times_[i+1]
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(i, times_.size() - 2);
}

Vec Trajectory::at(double t) const {
  if (times_.empty()) {
    throw Error(ErrorCategory::invalid_state, "empty trajectory");
  }
  if (times_.size() == 1 || t <= times_.front()) return states_.front();
  if (t >= times_.back()) return states_.back();
  const std::size_t i = segment_index(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * states_[i] + (h10 * h) * derivs_[i] + h01 * states_[i + 1] +
         (h11 * h) * derivs_[i + 1];
}

double Trajectory::c_s_avg_at(double t) const { return at(t).tail(m_).mean(); }
double Trajectory::T_avg_at(double t) const { return at(t).head(m_).mean(); }

void Trajectory::truncate(double t_cut) {
  if (empty() || t_cut >= times_.back()) return;
  if (t_cut < times_.front()) {
    throw Error(ErrorCategory::invalid_parameter, "truncation time precedes trajectory start");
  }
  const Vec x_cut = at(t_cut);
  Vec dx_cut = derivs_.front();  // same length; recompute by Hermite slope
  {
    const std::size_t i = segment_index(t_cut);
    const double h = times_[i + 1] - times_[i];
    const double s = (t_cut - times_[i]) / h;
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / h;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h;
    const double d11 = 3 * s2 - 2 * s;
    dx_cut = d00 * states_[i] + d10 * derivs_[i] + d01 * states_[i + 1] +
             d11 * derivs_[i + 1];
  }
  while (!times_.empty() && times_.back() > t_cut) {
    times_.pop_back();
    states_.pop_back();
    derivs_.pop_back();
    T_avg_.pop_back();
    c_avg_.pop_back();
  }
  if (times_.empty() || times_.back() < t_cut) {
    times_.push_back(t_cut);
    states_.push_back(x_cut);
    derivs_.push_back(dx_cut);
    T_avg_.push_back(x_cut.head(m_).mean());
    c_avg_.push_back(x_cut.tail(m_).mean());
  }
}

namespace {

// TR-BDF2 constants, gamma = 2 - sqrt(2).
const double kGamma = 2.0 - std::sqrt(2.0);
const double kD = kGamma / 2.0;                                      // stage coefficient
const double kC1 = 1.0 / (kGamma * (2.0 - kGamma));                  // BDF2 weight on x_gamma
const double kC2 = (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));
// Embedded error weights: difference between the 2nd-order step and the
// 3rd-order quadrature through the three stage nodes.
const double kW1 = std::sqrt(2.0) / 4.0;
const double kW3 = kD;
const double kB2 = (3.0 * std::sqrt(2.0) + 4.0) / 12.0;
const double kB3 = (2.0 - std::sqrt(2.0)) / 6.0;
const double kB1 = 1.0 - kB2 - kB3;
const double kE1 = kW1 - kB1;
const double kE2 = kW1 - kB2;
const double kE3 = kW3 - kB3;

class Stepper {
 public:
  Stepper(const OdeSystem& sys, const IntegratorSettings& st, Eigen::Index n)
      : sys_(sys), st_(st), n_(n), half_(n / 2) {
    f0_.resize(n); fg_.resize(n); f1_.resize(n);
    z_.resize(n); g_.resize(n); dz_.resize(n); est_.resize(n); jac_.resize(n, n);
  }

  double wrms(const Vec& v, const Vec& ref_a, const Vec& ref_b) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double atol = i < half_ ? st_.abs_tol_T : st_.abs_tol_c;
      const double sc = atol + st_.rel_tol * std::max(std::abs(ref_a[i]), std::abs(ref_b[i]));
      const double r = v[i] / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n_));
  }

  // Simplified Newton on z = base + d*h*f(t, z) with the shared LU.
  bool solve_stage(double t, const Vec& base, double dh, const Vec& x_ref, Vec& z) {
    double prev_norm = -1.0;
    for (int it = 0; it < 12; ++it) {
      sys_.f(t, z, g_);
      g_ = z - dh * g_ - base;
      dz_ = lu_.solve(g_);
      z -= dz_;
      const double nrm = wrms(dz_, x_ref, z);
      if (nrm < 0.03) return true;
      if (prev_norm >= 0.0 && nrm >= prev_norm) return false;  // diverging
      prev_norm = nrm;
    }
    return false;
  }

  // One TR-BDF2 attempt from (t, x, f0_) with step h. On acceptance fills
  // x1/f1 and the error norm. Returns false on Newton failure.
  bool attempt(double t, const Vec& x, double h, Vec& x1, double& err) {
    sys_.jacobian(t, x, jac_);
    Mat iter = -kD * h * jac_;
    iter.diagonal().array() += 1.0;
    lu_.compute(iter);

    // TR stage to t + gamma h
    const double tg = t + kGamma * h;
    Vec base = x + kD * h * f0_;
    z_ = x + kGamma * h * f0_;  // Euler predictor
    if (!solve_stage(tg, base, kD * h, x, z_)) return false;
    const Vec xg = z_;
    sys_.f(tg, xg, fg_);

    // BDF2 stage to t + h
    base = kC1 * xg - kC2 * x;
    z_ = xg + ((1.0 - kGamma) / kGamma) * (xg - x);  // linear extrapolation
    if (!solve_stage(t + h, base, kD * h, x, z_)) return false;
    x1 = z_;
    sys_.f(t + h, x1, f1_);

    est_ = h * (kE1 * f0_ + kE2 * fg_ + kE3 * f1_);
    est_ = lu_.solve(est_);  // stiff filtering of the estimate
    err = wrms(est_, x, x1);
    return std::isfinite(err);
  }

  const OdeSystem& sys_;
  const IntegratorSettings& st_;
  Eigen::Index n_, half_;
  Vec f0_, fg_, f1_, z_, g_, dz_, est_;
  Mat jac_;
  Eigen::PartialPivLU<Mat> lu_;
};

double initial_step(const Stepper& s, const Vec& x0, const Vec& f0, double span) {
  const double dx = s.wrms(x0, x0, x0);
  const double df = s.wrms(f0, x0, x0);
  double h0 = (df > 1e-12) ? 0.01 * dx / df : 1e-3 * span;
  h0 = std::min({h0, span, 10.0});
  return std::max(h0, 1e-8);
}

}  // namespace

IntegrationResult integrate_interval(const OdeSystem& sys, double t0, double t1,
                                     Vec x0, const IntegratorSettings& settings,
                                     double h_hint, Trajectory* record) {
  if (!(t1 >= t0)) {
    throw Error(ErrorCategory::invalid_parameter, "integration span must have t1 >= t0");
  }
  const Eigen::Index n = x0.size();
  Stepper stepper(sys, settings, n);

  Vec x = std::move(x0);
  sys.f(t0, x, stepper.f0_);
  if (record && record->empty()) record->append(t0, x, stepper.f0_);
  if (t1 == t0) return {x, h_hint, 0};

  // `h_free` is the controller's unclamped suggestion and the hint returned
  // to the caller; `h` is what a single step actually uses (clamped to the
  // remaining span). Returning clamped sizes as hints would poison the next
  // interval after a sliver step.
  double h_free = h_hint > 0.0 ? h_hint : initial_step(stepper, x, stepper.f0_, t1 - t0);
  h_free = std::min(h_free, settings.max_step);
  double t = t0;
  long accepted = 0;
  Vec x1(n);

  for (long step = 0; step < settings.max_steps; ++step) {
    h_free = std::min(h_free, settings.max_step);
    double h = h_free;
    bool is_last = false;
    if (t + h >= t1 || t1 - (t + h) < 0.05 * h) {
      h = t1 - t;
      is_last = true;
    }
    const double h_min = std::max(1e-12, 16.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
    if (h < h_min) {
      if (is_last) return {x, h_free, accepted};  // sliver left by rounding
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "step size underflow at t = %.17g (h = %.3g, span [%.17g, %.17g])", t, h,
                    t0, t1);
      throw Error(ErrorCategory::step_failure, msg);
    }

    double err = 0.0;
    if (!stepper.attempt(t, x, h, x1, err)) {
      h_free = 0.5 * h;  // Newton failed
      continue;
    }
    if (err <= 1.0) {
      t = is_last ? t1 : t + h;
      x.swap(x1);
      stepper.f0_.swap(stepper.f1_);
      ++accepted;
      if (record) record->append(t, x, stepper.f0_);
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0), 0.2, 5.0);
      h_free = std::min(h * fac, settings.max_step);
      if (is_last) return {x, h_free, accepted};
    } else {
      const double fac = std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.1, 0.9);
      h_free = h * fac;
    }
  }
  throw Error(ErrorCategory::step_failure, "maximum step count exceeded");
}

}  // namespace secdry
