#include "secdry/model.hpp"

#include <cmath>

namespace secdry {

std::vector<std::string> validate(const ModelParameters& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCategory::invalid_parameter,
                  std::string(name) + " must be strictly positive and finite");
    }
  };
  positive(p.rho, "rho");
  positive(p.rho_d, "rho_d");
  positive(p.k, "k");
  positive(p.C_p, "C_p");
  positive(p.C_p_g, "C_p_g");
  positive(p.A, "A");
  positive(p.T_0, "T_0");
  positive(p.c_s0, "c_s0");
  positive(p.H, "H");
  positive(p.R, "R");
  // dH_s, E_a and h admit 0: the isothermal-desorption and insulated
  // configurations are legitimate limiting cases.
  if (p.dH_s < 0.0 || !std::isfinite(p.dH_s)) {
    throw Error(ErrorCategory::invalid_parameter, "dH_s must be >= 0 and finite");
  }
  if (p.E_a < 0.0 || !std::isfinite(p.E_a)) {
    throw Error(ErrorCategory::invalid_parameter, "E_a must be >= 0 and finite");
  }
  if (p.h < 0.0 || !std::isfinite(p.h)) {
    throw Error(ErrorCategory::invalid_parameter, "h must be >= 0 and finite");
  }
  if (p.c_s_eq < 0.0) {
    throw Error(ErrorCategory::invalid_parameter, "c_s_eq must be >= 0");
  }
  if (p.m < 3) {
    throw Error(ErrorCategory::invalid_parameter, "grid needs m >= 3 cells");
  }

  std::vector<std::string> warnings;
  if (p.h < 1.0 || p.h > 100.0) {
    warnings.push_back("h = " + std::to_string(p.h) +
                       " W/(m^2 K) outside the typical range [1, 100]");
  }
  if (p.E_a < 5e3 || p.E_a > 5e4) {
    warnings.push_back("E_a = " + std::to_string(p.E_a) +
                       " J/mol outside the typical range [5e3, 5e4]");
  }
  return warnings;
}

std::vector<std::string> validate(const ShelfSchedule& s) {
  if (s.T_b_max < s.T_b0) {
    throw Error(ErrorCategory::invalid_parameter, "T_b_max must be >= T_b0");
  }
  if (s.r < 0.0 || !std::isfinite(s.r)) {
    throw Error(ErrorCategory::invalid_parameter, "ramp rate must be >= 0");
  }
  return {};
}

void check_state(const ProductState& state) {
  if (state.T.size() != state.c_s.size()) {
    throw Error(ErrorCategory::invalid_state, "T and c_s lengths differ");
  }
  for (Eigen::Index i = 0; i < state.T.size(); ++i) {
    if (!std::isfinite(state.T[i]) || state.T[i] <= 0.0) {
      throw Error(ErrorCategory::invalid_state,
                  "temperature entry " + std::to_string(i) + " not finite/positive");
    }
    if (!std::isfinite(state.c_s[i]) || state.c_s[i] < -1e-12) {
      throw Error(ErrorCategory::invalid_state,
                  "concentration entry " + std::to_string(i) + " negative/non-finite");
    }
  }
}

Grid build_grid(const ModelParameters& p) {
  if (p.m < 2) {
    throw Error(ErrorCategory::invalid_parameter, "grid needs m >= 2 points");
  }
  if (!(p.H > 0.0)) {
    throw Error(ErrorCategory::invalid_parameter, "H must be > 0");
  }
  return Grid{p.m, p.H / (p.m - 1)};
}

void model_rhs(const Vec& x, const ControlInput& u, const ModelParameters& p,
               const Grid& grid, Vec& dxdt) {
  const int m = grid.m;
  dxdt.resize(2 * m);
  const double dz2 = grid.dz * grid.dz;
  const double alpha = p.k / (p.rho * p.C_p);
  const double beta = p.rho_d * p.dH_s / (p.rho * p.C_p);
  const double q = u.Q_v / (p.rho * p.C_p);
  const double bottom = 2.0 * p.h / (p.rho * p.C_p * grid.dz);

  const auto T = x.head(m);
  const auto c = x.tail(m);
  auto dT = dxdt.head(m);
  auto dc = dxdt.tail(m);

  for (int i = 0; i < m; ++i) {
    dc[i] = -desorption_rate_constant(T[i], p) * (c[i] - p.c_s_eq);
  }
  dT[0] = 2.0 * alpha * (T[1] - T[0]) / dz2 + beta * dc[0] + q;
  for (int i = 1; i < m - 1; ++i) {
    dT[i] = alpha * (T[i + 1] - 2.0 * T[i] + T[i - 1]) / dz2 + beta * dc[i] + q;
  }
  dT[m - 1] = -2.0 * alpha * (T[m - 1] - T[m - 2]) / dz2 -
              bottom * (T[m - 1] - u.T_b) + beta * dc[m - 1] + q;
}

ProductState rhs(const ProductState& state, const ControlInput& u,
                 const ModelParameters& p, const Grid& grid) {
  check_state(state);
  if (state.size() != grid.m) {
    throw Error(ErrorCategory::invalid_state, "state size does not match grid");
  }
  Vec dxdt;
  model_rhs(state.stacked(), u, p, grid, dxdt);
  return ProductState::from_stacked(dxdt);
}

void model_jacobian(const Vec& x, const ModelParameters& p, const Grid& grid,
                    Mat& J) {
  const int m = grid.m;
  J.setZero(2 * m, 2 * m);
  const double dz2 = grid.dz * grid.dz;
  const double a = p.k / (p.rho * p.C_p) / dz2;
  const double beta = p.rho_d * p.dH_s / (p.rho * p.C_p);
  const double bottom = 2.0 * p.h / (p.rho * p.C_p * grid.dz);

  const auto T = x.head(m);
  const auto c = x.tail(m);

  for (int i = 0; i < m; ++i) {
    const double g = desorption_rate_constant(T[i], p);
    const double dg_dT = g * p.E_a / (p.R * T[i] * T[i]);
    // concentration row
    J(m + i, m + i) = -g;
    J(m + i, i) = -dg_dT * (c[i] - p.c_s_eq);
    // coupling of the desorption heat sink into the temperature row
    J(i, m + i) = beta * J(m + i, m + i);
    J(i, i) = beta * J(m + i, i);
  }
  // conduction block
  J(0, 0) += -2.0 * a;
  J(0, 1) += 2.0 * a;
  for (int i = 1; i < m - 1; ++i) {
    J(i, i - 1) += a;
    J(i, i) += -2.0 * a;
    J(i, i + 1) += a;
  }
  J(m - 1, m - 2) += 2.0 * a;
  J(m - 1, m - 1) += -2.0 * a - bottom;
}

ProductState initial_state(const ModelParameters& p) {
  return ProductState{Vec::Constant(p.m, p.T_0), Vec::Constant(p.m, p.c_s0)};
}

}  // namespace secdry
