#include <doctest.h>

#include <cmath>

#include "secdry/observer.hpp"

using namespace secdry;

namespace {

IntegratorSettings truth_settings() {
  IntegratorSettings st;
  st.max_step = 60.0;
  return st;
}

}  // namespace

TEST_CASE("observer rhs with zero gains equals the model rhs") {
  ModelParameters p;
  const Grid grid = build_grid(p);
  ProductState est{Vec::LinSpaced(p.m, 250.0, 270.0), Vec::Constant(p.m, 0.15)};
  const Vec y = Vec::LinSpaced(p.m, 252.0, 268.0);
  const ControlInput u{280.0, 0.0};
  const ProductState base = rhs(est, u, p, grid);
  const ProductState obs = observer_rhs(est, y, ObserverGains{0.0, 0.0, SensorKind::full_field}, u, p, grid);
  CHECK((obs.T - base.T).cwiseAbs().maxCoeff() == 0.0);
  CHECK((obs.c_s - base.c_s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("observer rhs correction vanishes for a perfect estimate") {
  ModelParameters p;
  const Grid grid = build_grid(p);
  ProductState est{Vec::LinSpaced(p.m, 250.0, 270.0), Vec::Constant(p.m, 0.15)};
  const ControlInput u{280.0, 0.0};
  const ProductState base = rhs(est, u, p, grid);
  const ProductState obs =
      observer_rhs(est, est.T, default_gains(SensorKind::full_field), u, p, grid);
  CHECK((obs.T - base.T).cwiseAbs().maxCoeff() == 0.0);
  CHECK((obs.c_s - base.c_s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ones-matrix correction, hand example with m = 2") {
  ModelParameters p;
  p.m = 2;
  const Grid grid = build_grid(p);
  ProductState est{Vec::Constant(2, 261.0), Vec::Constant(2, 0.1)};
  const Vec y = Vec::Constant(2, 260.0);  // T_hat - y = (1, 1)
  const ControlInput u{280.0, 0.0};
  const ObserverGains g{0.0, 5e-7, SensorKind::full_field};
  const ProductState base = rhs(est, u, p, grid);
  const ProductState obs = observer_rhs(est, y, g, u, p, grid);
  // L_c * sum(T_hat - y) = 5e-7 * 2 = 1e-6 added to every concentration cell
  CHECK((obs.c_s - base.c_s)[0] == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK((obs.c_s - base.c_s)[1] == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK((obs.T - base.T).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("observer rhs shape mismatch") {
  ModelParameters p;
  const Grid grid = build_grid(p);
  ProductState est{Vec::Constant(p.m, 260.0), Vec::Constant(p.m, 0.1)};
  const ControlInput u{280.0, 0.0};
  CHECK_THROWS_AS(
      observer_rhs(est, Vec::Constant(1, 260.0), default_gains(SensorKind::full_field), u, p, grid),
      Error);
  CHECK_THROWS_AS(
      observer_rhs(est, Vec::Constant(p.m, 260.0), default_gains(SensorKind::bottom_point), u, p, grid),
      Error);
}

TEST_CASE("gain schedule switches once at switch_time") {
  GainSchedule sched;
  sched.initial = ObserverGains{-1e-6, 5e-7, SensorKind::full_field};
  sched.reduced = ObserverGains{-1e-6, 1e-7, SensorKind::full_field};
  sched.switch_time = 100.0;
  GainsOrSchedule g = sched;
  CHECK(gains_at(g, 0.0).L_c == doctest::Approx(5e-7));
  CHECK(gains_at(g, 99.9).L_c == doctest::Approx(5e-7));
  CHECK(gains_at(g, 100.0).L_c == doctest::Approx(1e-7));
  CHECK(gains_at(g, 1e6).L_c == doctest::Approx(1e-7));
}

TEST_CASE("zero-gain observer reproduces the open-loop simulation") {
  ModelParameters p;
  ShelfSchedule sched;
  const double horizon = 2.0 * 3600.0;
  Trajectory truth = integrate(p, sched, nullptr, 0.0, horizon, truth_settings());
  auto meas = sample_measurements(truth, 10.0, SensorKind::full_field, 0.0, 0);

  // start the estimate from a deliberately wrong concentration
  ProductState init = default_initial_estimate(meas, p.m, 0.0314);
  EstimateTrajectory est =
      run_observer(meas, ObserverGains{0.0, 0.0, SensorKind::full_field}, init, p, sched, {});

  // open-loop reference: integrate the same wrong initial state directly
  ModelParameters p_init = p;
  p_init.c_s0 = 0.0314;
  Trajectory open_loop = integrate(p_init, sched, nullptr, 0.0, horizon, {});
  for (std::size_t k = 0; k < est.size(); k += 60) {
    const Vec x = open_loop.at(est.times[k]);
    CHECK(est.c_s_avg(k) == doctest::Approx(x.tail(p.m).mean()).epsilon(1e-6));
    CHECK(est.T_avg(k) == doctest::Approx(x.head(p.m).mean()).epsilon(1e-7));
  }
}

TEST_CASE("perfect initialization keeps the error at numerical zero") {
  ModelParameters p;
  ShelfSchedule sched;
  const double horizon = 2.0 * 3600.0;
  Trajectory truth = integrate(p, sched, nullptr, 0.0, horizon, truth_settings());
  auto meas = sample_measurements(truth, 10.0, SensorKind::full_field, 0.0, 0);
  ProductState init = default_initial_estimate(meas, p.m, p.c_s0);
  EstimateTrajectory est =
      run_observer(meas, default_gains(SensorKind::full_field), init, p, sched, {});
  ErrorSeries err = estimation_errors(est, truth);
  CHECK(err.initial_error == 0.0);
  REQUIRE(err.convergence_time.has_value());
  CHECK(*err.convergence_time == 0.0);
  for (double e : err.e_c_avg) CHECK(e < 1e-5);
}

TEST_CASE("estimation error series") {
  ModelParameters p;
  ShelfSchedule sched;
  Trajectory truth = integrate(p, sched, nullptr, 0.0, 600.0, truth_settings());
  auto meas = sample_measurements(truth, 10.0, SensorKind::full_field, 0.0, 0);

  SUBCASE("estimate identical to truth gives zero errors") {
    EstimateTrajectory est;
    est.sensor = SensorKind::full_field;
    est.times = meas.times;
    est.T_hat.resize(p.m, static_cast<Eigen::Index>(meas.size()));
    est.c_s_hat.resize(p.m, static_cast<Eigen::Index>(meas.size()));
    est.innovation = Mat::Zero(p.m, static_cast<Eigen::Index>(meas.size()));
    for (std::size_t k = 0; k < meas.size(); ++k) {
      const Vec x = truth.at(meas.times[k]);
      est.T_hat.col(static_cast<Eigen::Index>(k)) = x.head(p.m);
      est.c_s_hat.col(static_cast<Eigen::Index>(k)) = x.tail(p.m);
    }
    ErrorSeries err = estimation_errors(est, truth);
    CHECK(*err.convergence_time == 0.0);
    for (double e : err.e_c_avg) CHECK(e < 1e-9);

    SUBCASE("a constant concentration offset shows up as e_c_avg") {
      est.c_s_hat.array() += 0.005;
      ErrorSeries off = estimation_errors(est, truth);
      for (double e : off.e_c_avg) CHECK(e == doctest::Approx(0.005).epsilon(1e-9));
    }
  }
}

TEST_CASE("default-gain observer converges and the innovation decays") {
  ModelParameters p;
  ShelfSchedule sched;
  const double horizon = 4.0 * 3600.0;
  Trajectory truth = integrate(p, sched, nullptr, 0.0, horizon, truth_settings());
  auto meas = sample_measurements(truth, 10.0, SensorKind::full_field, 0.0, 0);
  ProductState init = default_initial_estimate(meas, p.m, 0.0314);
  EstimateTrajectory est =
      run_observer(meas, default_gains(SensorKind::full_field), init, p, sched, {});
  ErrorSeries err = estimation_errors(est, truth);
  REQUIRE(err.convergence_time.has_value());
  CHECK(*err.convergence_time / 3600.0 > 1.0);
  CHECK(*err.convergence_time / 3600.0 < 3.0);

  // innovation magnitude is eventually monotone decreasing after the first hour
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < est.size(); k += 30) {
    if (est.times[k] < 3600.0) continue;
    const double nrm = est.innovation.col(static_cast<Eigen::Index>(k)).cwiseAbs().sum();
    CHECK(nrm <= prev * (1.0 + 1e-9));
    prev = nrm;
  }
}

TEST_CASE("run_observer input validation") {
  ModelParameters p;
  ShelfSchedule sched;
  Trajectory truth = integrate(p, sched, nullptr, 0.0, 100.0, {});
  auto meas = sample_measurements(truth, 10.0, SensorKind::full_field, 0.0, 0);
  ProductState wrong{Vec::Constant(p.m + 1, 250.0), Vec::Constant(p.m + 1, 0.1)};
  CHECK_THROWS_AS(
      run_observer(meas, default_gains(SensorKind::full_field), wrong, p, sched, {}), Error);
  MeasurementSeries empty;
  empty.sensor = SensorKind::full_field;
  CHECK_THROWS_AS(run_observer(empty, default_gains(SensorKind::full_field),
                               default_initial_estimate(meas, p.m, 0.1), p, sched, {}),
                  Error);
}
