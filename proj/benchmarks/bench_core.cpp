#include <benchmark/benchmark.h>

#include "secdry/design.hpp"
#include "secdry/observer.hpp"

using namespace secdry;

namespace {

const ModelParameters kParams{};
const ShelfSchedule kShelf{};

void BM_ModelRhs(benchmark::State& state) {
  ModelParameters p = kParams;
  p.m = static_cast<int>(state.range(0));
  const Grid grid = build_grid(p);
  Vec x(2 * p.m);
  x.head(p.m).setConstant(280.0);
  x.tail(p.m).setConstant(0.1);
  Vec dxdt(2 * p.m);
  const ControlInput u{300.0, 0.0};
  for (auto _ : state) {
    model_rhs(x, u, p, grid, dxdt);
    benchmark::DoNotOptimize(dxdt.data());
  }
}
BENCHMARK(BM_ModelRhs)->Arg(20)->Arg(80);

void BM_Jacobian(benchmark::State& state) {
  ModelParameters p = kParams;
  p.m = static_cast<int>(state.range(0));
  const Grid grid = build_grid(p);
  Vec x(2 * p.m);
  x.head(p.m).setConstant(280.0);
  x.tail(p.m).setConstant(0.1);
  Mat J;
  for (auto _ : state) {
    model_jacobian(x, p, grid, J);
    benchmark::DoNotOptimize(J.data());
  }
}
BENCHMARK(BM_Jacobian)->Arg(20)->Arg(80);

void BM_IntegrateHour(benchmark::State& state) {
  for (auto _ : state) {
    Trajectory traj = integrate(kParams, kShelf, nullptr, 0.0, 3600.0, {});
    benchmark::DoNotOptimize(traj.size());
  }
}
BENCHMARK(BM_IntegrateHour);

void BM_ObserverHour(benchmark::State& state) {
  IntegratorSettings st;
  st.max_step = 60.0;
  const Trajectory truth = integrate(kParams, kShelf, nullptr, 0.0, 3600.0, st);
  const auto meas = sample_measurements(truth, 10.0, SensorKind::full_field, 0.0, 0);
  const ProductState init = default_initial_estimate(meas, kParams.m, 0.0314);
  for (auto _ : state) {
    EstimateTrajectory est =
        run_observer(meas, default_gains(SensorKind::full_field), init, kParams, kShelf, {});
    benchmark::DoNotOptimize(est.size());
  }
}
BENCHMARK(BM_ObserverHour);

void BM_ErrorDynamicsEig(benchmark::State& state) {
  const LinearizedSystem lin = nominal_linearization(kParams, kShelf, SensorKind::full_field);
  for (auto _ : state) {
    ErrorDynamics ed = error_dynamics(lin, default_gains(SensorKind::full_field));
    benchmark::DoNotOptimize(ed.eigenvalues.data());
  }
}
BENCHMARK(BM_ErrorDynamicsEig);

}  // namespace

BENCHMARK_MAIN();
