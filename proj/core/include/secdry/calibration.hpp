#ifndef SECDRY_CALIBRATION_HPP
#define SECDRY_CALIBRATION_HPP

#include <string>
#include <vector>

#include "secdry/simulate.hpp"

namespace secdry {

/// Observable channels a dataset can carry.
enum class DataChannel { T_avg, T_bottom, c_s_avg };

const char* to_string(DataChannel c);
DataChannel data_channel_from(const std::string& name);

struct Dataset {
  std::vector<double> times;   ///< s, within the simulation horizon
  std::vector<double> values;  ///< K or kg/kg depending on channel
  DataChannel channel = DataChannel::T_avg;
};

/// Which parameters are free. The heat transfer coefficient is identified
/// from temperature data; the desorption kinetics pair (A, E_a) from
/// concentration data. A and h are searched in log space (A spans many
/// orders of magnitude); E_a is searched linearly within its physical range.
enum class FitParameterSet { heat_transfer, kinetics };

struct FitProblem {
  std::vector<Dataset> data;
  FitParameterSet which = FitParameterSet::heat_transfer;
  ModelParameters base;      ///< fixed parameters + initial guess of the free ones
  ShelfSchedule sched;
  IntegratorSettings settings;

  double h_lo = 1.0, h_hi = 100.0;        ///< W/(m^2 K)
  double Ea_lo = 5e3, Ea_hi = 5e4;        ///< J/mol
  double A_lo = 1e-6, A_hi = 1e4;         ///< 1/s
};

struct FitResult {
  ModelParameters params;             ///< base with fitted entries substituted
  double loss = 0.0;                  ///< weighted sum of squared residuals
  std::vector<double> residuals;      ///< concatenated over datasets, model - data
  long evaluations = 0;
  bool budget_exhausted = false;      ///< warning: best-so-far returned
  std::vector<double> best_loss_history;  ///< nonincreasing
};

/// Deterministic bounded least squares: a coarse grid over the (log-scaled)
/// bounded parameters picks the basin, then compass pattern search refines.
/// Parameter draws whose simulation fails are penalized, not fatal. The
/// returned loss never exceeds the loss at the initial guess.
FitResult fit(const FitProblem& problem, long budget = 2000);

/// Loss of a single parameter vector (exposed for diagnostics/tests).
double fit_loss(const FitProblem& problem, const ModelParameters& candidate,
                std::vector<double>* residuals = nullptr);

}  // namespace secdry

#endif  // SECDRY_CALIBRATION_HPP
