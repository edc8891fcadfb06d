#ifndef SECDRY_MODEL_HPP
#define SECDRY_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <utility>

#include "secdry/types.hpp"

namespace secdry {

/// Builds the finite-volume grid, dz = H/(m-1). Requires m >= 2 for the
/// spacing to be defined; the model itself needs m >= 3 (validate()).
Grid build_grid(const ModelParameters& p);

/// T_b(t) = min(T_b0 + r t, T_b_max); nondecreasing in t.
inline double shelf_temperature(double t, const ShelfSchedule& s) {
  return std::min(s.T_b0 + s.r * t, s.T_b_max);
}

/// Time at which the ramp reaches T_b_max (0 if it starts there,
/// +inf if it never does). Integrators split steps here: the schedule has a
/// slope discontinuity at the cap.
inline double shelf_cap_time(const ShelfSchedule& s) {
  if (s.T_b_max <= s.T_b0) return 0.0;
  if (s.r <= 0.0) return std::numeric_limits<double>::infinity();
  return (s.T_b_max - s.T_b0) / s.r;
}

/// Arrhenius desorption rate constant k_s = A exp(-E_a/(R T)).
inline double desorption_rate_constant(double T, const ModelParameters& p) {
  return p.A * std::exp(-p.E_a / (p.R * T));
}

/// Right-hand side of the discretized model, written into dxdt (size 2m,
/// stacked [dT; dc_s]).
///
/// Concentration: dc_i/dt = -k_s(T_i) (c_i - c_eq), the linear-driving-force
/// desorption law. Temperature: second-order conduction with an insulated
/// top cell, a Robin (shelf) bottom cell, the desorption heat sink
/// rho_d dH_s/(rho C_p) dc_i/dt substituted directly, and the volumetric
/// source Q_v/(rho C_p).
void model_rhs(const Vec& x, const ControlInput& u, const ModelParameters& p,
               const Grid& grid, Vec& dxdt);

/// Convenience overload on ProductState; validates the state first.
ProductState rhs(const ProductState& state, const ControlInput& u,
                 const ModelParameters& p, const Grid& grid);

/// Analytic Jacobian d(rhs)/dx at the given stacked state, written into J
/// (2m x 2m). Structure: tridiagonal conduction block, diagonal desorption
/// block, and the dH_s coupling entries.
void model_jacobian(const Vec& x, const ModelParameters& p, const Grid& grid,
                    Mat& J);

/// Arithmetic means (T_avg, c_s_avg) over the m cells.
inline std::pair<double, double> averages(const ProductState& s) {
  return {s.T.mean(), s.c_s.mean()};
}

/// Spatially uniform initial state (T_0, c_s0).
ProductState initial_state(const ModelParameters& p);

}  // namespace secdry

#endif  // SECDRY_MODEL_HPP
