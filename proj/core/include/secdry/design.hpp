#ifndef SECDRY_DESIGN_HPP
#define SECDRY_DESIGN_HPP

#include <Eigen/Core>
#include <complex>
#include <span>
#include <string>

#include "secdry/observer.hpp"

namespace secdry {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

/// Linearization of the model about a reference state, with the output map
/// C of the chosen sensor: C = [I_m 0] for full-field measurement, a single
/// unit row picking T_m for a bottom-point sensor.
struct LinearizedSystem {
  Vec F_ref;        ///< F(x_ref), 2m
  Mat Fprime_ref;   ///< Jacobian at x_ref, 2m x 2m
  ProductState x_ref;
  Mat C;            ///< m x 2m or 1 x 2m
  SensorKind sensor = SensorKind::full_field;
};

/// Analytic model Jacobian at the reference state. (The input enters
/// affinely, so u_ref does not influence the Jacobian; it is part of the
/// interface for callers that track the linearization point.)
Mat jacobian(const ModelParameters& p, const Grid& grid, const ProductState& x_ref,
             const ControlInput& u_ref);

LinearizedSystem linearize(const ModelParameters& p, const Grid& grid,
                           const ProductState& x_ref, const ControlInput& u_ref,
                           SensorKind sensor);

/// Spatially uniform reference state at the time-weighted space-time mean of
/// the trajectory's temperature and concentration (trapezoidal in time).
ProductState reference_state(const Trajectory& traj);

/// Observer error-dynamics matrix M = F'_ref + L C with the ones-structured
/// gain, its eigenvalues sorted from fastest to slowest (descending |Re|,
/// ties by descending |Im|), and the eigenvector basis. When M is not
/// reliably diagonalizable only the eigenvalues (Schur) are available and
/// `diagonalizable` is false.
struct ErrorDynamics {
  Mat M;
  VecC eigenvalues;
  MatC U;  ///< right eigenvectors (columns), sorted with the eigenvalues
  MatC V;  ///< U^{-1}
  bool stable = false;
  bool diagonalizable = false;
  int m = 0;  ///< cells; eigen dimension is 2m
};

ErrorDynamics error_dynamics(const LinearizedSystem& lin, const ObserverGains& gains);

/// Slowest relevant time constant tau = 1/|Re(lambda_{m+1})| (Eq.-(35)-style
/// index: the (m+1)-th fastest eigenvalue). Throws Error{degenerate} if that
/// eigenvalue has zero real part.
double time_constant(const ErrorDynamics& ed);

/// Estimated convergence time 4 tau.
inline double convergence_time_estimate(const ErrorDynamics& ed) {
  return 4.0 * time_constant(ed);
}

/// True if either of the dominant pair {lambda_m, lambda_{m+1}} has
/// |Im| > |Re| (ringing faster than it decays).
bool oscillatory(const ErrorDynamics& ed);

/// Per-mode contributions to the concentration error: nu[p] is the average
/// over the concentration block of u_{i,p} (V e0)_p (real part). The modal
/// expansion must reproduce e0; reconstruction_rel_err reports the check.
struct ModalContributions {
  Vec nu;                            ///< 2m averaged coefficients (real parts)
  MatC nu_full;                      ///< 2m x 2m full coefficients nu_{i,p}
  double reconstruction_rel_err = 0.0;
};

ModalContributions modal_contributions(const ErrorDynamics& ed, const Vec& e0);

enum class SweepMethod { eigenvalue, simulation };

const char* to_string(SweepMethod m);

struct SweepCell {
  double L_T = 0.0;
  double L_c = 0.0;
  double conv_time_s = 0.0;  ///< NaN when unstable / not converged
  bool stable = false;
  bool oscillatory = false;
  SweepMethod method = SweepMethod::eigenvalue;
};

struct SweepOptions {
  SweepMethod method = SweepMethod::eigenvalue;
  SensorKind sensor = SensorKind::full_field;
  double init_cs = 0.0314;      ///< initial concentration estimate for simulated cells
  double period = 10.0;         ///< sampling period for simulated cells, s
  double horizon = 12.0 * 3600.0;
  double dry_threshold = 0.01;  ///< end of the reference-state averaging span
  IntegratorSettings settings;
  int threads = 0;              ///< 0 = hardware concurrency
};

/// Convergence-time map over the gain grid (row-major over lt x lc).
/// The eigenvalue method reports 4 tau from the linearized error dynamics;
/// the simulation method measures the 2%-rule convergence time of an actual
/// observer run against a noise-free nominal trajectory. Unstable or
/// non-converged cells carry NaN and are flagged, never fatal.
std::vector<SweepCell> design_space_sweep(std::span<const double> lt_values,
                                          std::span<const double> lc_values,
                                          const ModelParameters& p,
                                          const ShelfSchedule& sched,
                                          const SweepOptions& opts);

/// Linearization about the nominal shelf-only run: the reference state is the
/// space-time mean over the drying span (run terminated at dry_threshold, or
/// at the horizon if never reached).
LinearizedSystem nominal_linearization(const ModelParameters& p,
                                       const ShelfSchedule& sched, SensorKind sensor,
                                       double dry_threshold = 0.01,
                                       const IntegratorSettings& settings = {},
                                       double horizon = 48.0 * 3600.0);

}  // namespace secdry

#endif  // SECDRY_DESIGN_HPP
