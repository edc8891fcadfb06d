#ifndef SECDRY_CSV_HPP
#define SECDRY_CSV_HPP

#include <iosfwd>
#include <string>

#include "secdry/calibration.hpp"
#include "secdry/control.hpp"
#include "secdry/design.hpp"
#include "secdry/observer.hpp"

namespace secdry {

/// All writers emit plain CSV: one header row, decimal points, no thousands
/// separators, >= 12 significant digits on floating-point values.

/// Columns: t_s, T_1..T_m, cs_1..cs_m.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Columns: t_s, T_1..T_m (full-field) or t_s, T_p (bottom-point).
void write_measurements_csv(std::ostream& out, const MeasurementSeries& meas);
MeasurementSeries read_measurements_csv(std::istream& in, const std::string& origin);

/// Columns: t_s, That_1..That_m, cshat_1..cshat_m[, ec_avg, eT_avg].
/// The error columns are present when `errors` is non-null.
void write_estimate_csv(std::ostream& out, const EstimateTrajectory& est,
                        const ErrorSeries* errors = nullptr);

/// Trajectory columns plus Qv_Wm3 and Tmax_K at the control instants.
void write_closed_loop_csv(std::ostream& out, const ClosedLoopResult& result);

/// Columns: L_T, L_c, conv_time_s, stable, oscillatory, method.
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

/// Dataset for calibration: t_s,<channel> with channel one of
/// T_avg_K | T_p_K | cs_avg.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, const std::string& origin);

/// Helpers shared by the CLI.
void write_file(const std::string& path, const std::string& content);
std::string format_sig(double v);  ///< %.15g

}  // namespace secdry

#endif  // SECDRY_CSV_HPP
