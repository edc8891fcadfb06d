#ifndef SECDRY_TYPES_HPP
#define SECDRY_TYPES_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "secdry/errors.hpp"

namespace secdry {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Physical constants, kinetics, geometry and discretization of the reduced
/// secondary-drying model. All values in SI (kg, m, s, K, J, mol).
struct ModelParameters {
  double rho = 215.0;       ///< effective density, kg/m^3
  double rho_d = 212.21;    ///< dried-product density, kg/m^3
  double k = 0.217;         ///< effective thermal conductivity, W/(m K)
  double C_p = 2590.0;      ///< effective heat capacity, J/(kg K)
  double C_p_g = 1617.0;    ///< gas heat capacity, J/(kg K); unused in the reduced model
  double dH_s = 2.68e6;     ///< desorption enthalpy, J/kg
  double E_a = 8316.0;      ///< activation energy, J/mol
  double A = 3.34e-3;       ///< Arrhenius frequency factor, 1/s
  double h = 30.0;          ///< bottom heat transfer coefficient, W/(m^2 K)
  double T_0 = 241.15;      ///< initial product temperature, K
  double c_s0 = 0.2059;     ///< initial bound-water concentration, kg/kg
  double c_s_eq = 0.0;      ///< equilibrium concentration, kg/kg
  double H = 0.02;          ///< product height, m
  double R = 8.314;         ///< gas constant, J/(mol K)
  int m = 20;               ///< spatial grid points

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

/// Shelf temperature program: linear ramp from T_b0 at rate r, held at
/// T_b_max once reached.
struct ShelfSchedule {
  double T_b0 = 253.15;       ///< initial shelf temperature, K
  double r = 0.2 / 60.0;      ///< ramp rate, K/s
  double T_b_max = 313.15;    ///< hold temperature, K

  friend bool operator==(const ShelfSchedule&, const ShelfSchedule&) = default;
};

/// Uniform cell grid; dz = H/(m-1), end cells carry half volume.
struct Grid {
  int m = 0;
  double dz = 0.0;
};

/// Paired temperature/concentration fields on the grid. Index 0 is the
/// insulated top surface, index m-1 the shelf-heated bottom.
struct ProductState {
  Vec T;    ///< temperatures, K
  Vec c_s;  ///< bound-water concentrations, kg water / kg solid

  int size() const { return static_cast<int>(T.size()); }

  /// Stacked state vector [T; c_s] used by the integrator and observers.
  Vec stacked() const {
    Vec x(T.size() + c_s.size());
    x << T, c_s;
    return x;
  }
  static ProductState from_stacked(const Vec& x) {
    const auto m = x.size() / 2;
    return ProductState{x.head(m), x.tail(m)};
  }
};

/// Manipulated inputs: shelf temperature and volumetric microwave power.
struct ControlInput {
  double T_b = 0.0;  ///< shelf temperature, K
  double Q_v = 0.0;  ///< volumetric heat source, W/m^3
};

/// Hard-error check of parameter invariants plus soft warnings for values
/// outside the physically typical ranges (h in [1,100] W/(m^2 K), E_a in
/// [5e3, 5e4] J/mol). Warnings are returned, not thrown: literature systems
/// (e.g. A = 277 1/s) legitimately sit outside typical magnitudes.
std::vector<std::string> validate(const ModelParameters& p);
std::vector<std::string> validate(const ShelfSchedule& s);

/// Throws Error{invalid_state} if any entry is non-finite, T <= 0, or
/// c_s < -1e-12.
void check_state(const ProductState& state);

}  // namespace secdry

#endif  // SECDRY_TYPES_HPP
