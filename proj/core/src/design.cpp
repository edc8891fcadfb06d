#include "secdry/design.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace secdry {

Mat jacobian(const ModelParameters& p, const Grid& grid, const ProductState& x_ref,
             const ControlInput& /*u_ref*/) {
  check_state(x_ref);
  if (x_ref.size() != grid.m) {
    throw Error(ErrorCategory::shape_mismatch, "reference state size vs grid");
  }
  Mat J;
  model_jacobian(x_ref.stacked(), p, grid, J);
  return J;
}

LinearizedSystem linearize(const ModelParameters& p, const Grid& grid,
                           const ProductState& x_ref, const ControlInput& u_ref,
                           SensorKind sensor) {
  LinearizedSystem lin;
  lin.x_ref = x_ref;
  lin.sensor = sensor;
  lin.Fprime_ref = jacobian(p, grid, x_ref, u_ref);
  Vec f;
  model_rhs(x_ref.stacked(), u_ref, p, grid, f);
  lin.F_ref = std::move(f);
  const int m = grid.m;
  if (sensor == SensorKind::full_field) {
    lin.C = Mat::Zero(m, 2 * m);
    lin.C.leftCols(m).setIdentity();
  } else {
    lin.C = Mat::Zero(1, 2 * m);
    lin.C(0, m - 1) = 1.0;
  }
  return lin;
}

ProductState reference_state(const Trajectory& traj) {
  if (traj.empty()) {
    throw Error(ErrorCategory::invalid_parameter, "empty trajectory");
  }
  const auto& ts = traj.times();
  const auto& Ta = traj.T_avg();
  const auto& ca = traj.c_s_avg();
  double T_mean = Ta.front();
  double c_mean = ca.front();
  if (ts.size() > 1) {
    double wT = 0.0, wc = 0.0;
    const double span = ts.back() - ts.front();
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const double w = ts[i + 1] - ts[i];
      wT += 0.5 * w * (Ta[i] + Ta[i + 1]);
      wc += 0.5 * w * (ca[i] + ca[i + 1]);
    }
    T_mean = wT / span;
    c_mean = wc / span;
  }
  const int m = traj.cells();
  return ProductState{Vec::Constant(m, T_mean), Vec::Constant(m, c_mean)};
}

namespace {

/// Sort order: fastest first, i.e. descending |Re|, ties by descending |Im|,
/// then positive imaginary part first for a deterministic conjugate order.
std::vector<int> eigen_order(const VecC& lam) {
  std::vector<int> idx(lam.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&lam](int a, int b) {
    const double ra = std::abs(lam[a].real()), rb = std::abs(lam[b].real());
    if (ra != rb) return ra > rb;
    const double ia = std::abs(lam[a].imag()), ib = std::abs(lam[b].imag());
    if (ia != ib) return ia > ib;
    return lam[a].imag() > lam[b].imag();
  });
  return idx;
}

Mat gain_matrix(const LinearizedSystem& lin, const ObserverGains& gains) {
  const int m = static_cast<int>(lin.Fprime_ref.rows()) / 2;
  Mat M = lin.Fprime_ref;
  if (gains.sensor == SensorKind::full_field) {
    // L C = [L_T J_m, 0; L_c J_m, 0]
    M.topLeftCorner(m, m).array() += gains.L_T;
    M.bottomLeftCorner(m, m).array() += gains.L_c;
  } else {
    // L C puts (L_T; L_c) in column m-1
    M.col(m - 1).head(m).array() += gains.L_T;
    M.col(m - 1).tail(m).array() += gains.L_c;
  }
  return M;
}

}  // namespace

ErrorDynamics error_dynamics(const LinearizedSystem& lin, const ObserverGains& gains) {
  if (gains.sensor != lin.sensor) {
    throw Error(ErrorCategory::shape_mismatch,
                "gain sensor kind does not match the linearization output map");
  }
  ErrorDynamics ed;
  ed.m = static_cast<int>(lin.Fprime_ref.rows()) / 2;
  ed.M = gain_matrix(lin, gains);

  Eigen::EigenSolver<Mat> solver(ed.M, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCategory::decomposition, "eigendecomposition did not converge");
  }
  const VecC lam = solver.eigenvalues();
  const MatC U = solver.eigenvectors();
  const auto order = eigen_order(lam);
  const auto n = lam.size();
  ed.eigenvalues.resize(n);
  ed.U.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ed.eigenvalues[i] = lam[order[static_cast<std::size_t>(i)]];
    ed.U.col(i) = U.col(order[static_cast<std::size_t>(i)]);
  }
  ed.stable = (ed.eigenvalues.real().array() < 0.0).all();

  Eigen::FullPivLU<MatC> lu(ed.U);
  lu.setThreshold(1e-10);
  ed.diagonalizable = lu.isInvertible();
  if (ed.diagonalizable) {
    ed.V = lu.inverse();
  }
  return ed;
}

double time_constant(const ErrorDynamics& ed) {
  const double re = ed.eigenvalues[ed.m].real();  // lambda_{m+1}, 0-based index m
  if (re == 0.0) {
    throw Error(ErrorCategory::degenerate, "Re(lambda_{m+1}) = 0, time constant undefined");
  }
  return 1.0 / std::abs(re);
}

bool oscillatory(const ErrorDynamics& ed) {
  for (int i : {ed.m - 1, ed.m}) {
    const auto& l = ed.eigenvalues[i];
    if (std::abs(l.imag()) > std::abs(l.real())) return true;
  }
  return false;
}

ModalContributions modal_contributions(const ErrorDynamics& ed, const Vec& e0) {
  if (!ed.diagonalizable) {
    throw Error(ErrorCategory::decomposition,
                "eigenvector basis is singular; only Schur eigenvalues available");
  }
  if (e0.size() != ed.M.rows()) {
    throw Error(ErrorCategory::shape_mismatch, "initial error size vs dynamics");
  }
  const VecC w = ed.V * e0.cast<std::complex<double>>();
  ModalContributions out;
  out.nu_full = ed.U.array().rowwise() * w.transpose().array();
  const Vec recon = out.nu_full.rowwise().sum().real();
  const double scale = std::max(e0.cwiseAbs().maxCoeff(), 1e-300);
  out.reconstruction_rel_err = (recon - e0).cwiseAbs().maxCoeff() / scale;
  const int m = ed.m;
  out.nu = out.nu_full.bottomRows(m).colwise().mean().real().transpose();
  return out;
}

const char* to_string(SweepMethod m) {
  return m == SweepMethod::eigenvalue ? "eig" : "sim";
}

LinearizedSystem nominal_linearization(const ModelParameters& p,
                                       const ShelfSchedule& sched, SensorKind sensor,
                                       double dry_threshold,
                                       const IntegratorSettings& settings,
                                       double horizon) {
  Trajectory nominal = integrate(p, sched, nullptr, 0.0, horizon, settings);
  if (const auto t_dry = first_time_below(nominal, dry_threshold)) {
    nominal.truncate(*t_dry);
  }
  const Grid grid = build_grid(p);
  return linearize(p, grid, reference_state(nominal),
                   ControlInput{shelf_temperature(0.0, sched), 0.0}, sensor);
}

std::vector<SweepCell> design_space_sweep(std::span<const double> lt_values,
                                          std::span<const double> lc_values,
                                          const ModelParameters& p,
                                          const ShelfSchedule& sched,
                                          const SweepOptions& opts) {
  // Nominal noise-free run: truth for simulated cells. The linearization
  // reference is the space-time mean over the drying span only (run
  // terminated at the threshold), matching how the gains were designed.
  IntegratorSettings truth_settings = opts.settings;
  truth_settings.max_step = std::min(truth_settings.max_step, 60.0);
  Trajectory nominal = integrate(p, sched, nullptr, 0.0, opts.horizon, truth_settings);
  const Grid grid = build_grid(p);
  Trajectory drying_span = nominal;
  if (const auto t_dry = first_time_below(drying_span, opts.dry_threshold)) {
    drying_span.truncate(*t_dry);
  }
  const ProductState x_ref = reference_state(drying_span);
  const LinearizedSystem lin =
      linearize(p, grid, x_ref, ControlInput{shelf_temperature(0.0, sched), 0.0}, opts.sensor);

  MeasurementSeries meas;
  if (opts.method == SweepMethod::simulation) {
    meas = sample_measurements(nominal, opts.period, opts.sensor, 0.0, 0);
  }

  const std::size_t n_cells = lt_values.size() * lc_values.size();
  std::vector<SweepCell> cells(n_cells);

  auto run_cell = [&](std::size_t idx) {
    const double LT = lt_values[idx / lc_values.size()];
    const double Lc = lc_values[idx % lc_values.size()];
    SweepCell cell;
    cell.L_T = LT;
    cell.L_c = Lc;
    cell.method = opts.method;
    const ObserverGains gains{LT, Lc, opts.sensor};
    try {
      const ErrorDynamics ed = error_dynamics(lin, gains);
      cell.stable = ed.stable;
      cell.oscillatory = oscillatory(ed);
      if (!ed.stable) {
        cell.conv_time_s = std::numeric_limits<double>::quiet_NaN();
      } else if (opts.method == SweepMethod::eigenvalue) {
        cell.conv_time_s = convergence_time_estimate(ed);
      } else {
        const ProductState init =
            default_initial_estimate(meas, grid.m, opts.init_cs);
        ObserverRunOptions ro;
        ro.settings = opts.settings;
        const EstimateTrajectory est =
            run_observer(meas, gains, init, p, sched, ro);
        const ErrorSeries err = estimation_errors(est, nominal);
        cell.conv_time_s = err.convergence_time
                               ? *err.convergence_time
                               : std::numeric_limits<double>::quiet_NaN();
      }
    } catch (const Error&) {
      cell.stable = false;
      cell.oscillatory = false;
      cell.conv_time_s = std::numeric_limits<double>::quiet_NaN();
    }
    cells[idx] = cell;
  };

  int n_threads = opts.threads > 0
                      ? opts.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n_cells)));
  if (n_threads == 1 || opts.method == SweepMethod::eigenvalue) {
    for (std::size_t i = 0; i < n_cells; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n_cells; i = next.fetch_add(1)) {
          run_cell(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return cells;
}

}  // namespace secdry
