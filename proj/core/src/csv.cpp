#include "secdry/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace secdry {

std::string format_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double to_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCategory::parse, context + ": bad number '" + s + "'");
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const int m = traj.cells();
  out << "t_s";
  for (int i = 1; i <= m; ++i) out << ",T_" << i;
  for (int i = 1; i <= m; ++i) out << ",cs_" << i;
  out << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_sig(traj.times()[k]);
    const Vec& x = traj.stacked(k);
    for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << format_sig(x[i]);
    out << "\n";
  }
}

void write_measurements_csv(std::ostream& out, const MeasurementSeries& meas) {
  out << "t_s";
  if (meas.sensor == SensorKind::full_field) {
    for (int i = 1; i <= meas.channels(); ++i) out << ",T_" << i;
  } else {
    out << ",T_p";
  }
  out << "\n";
  for (std::size_t k = 0; k < meas.size(); ++k) {
    out << format_sig(meas.times[k]);
    for (int c = 0; c < meas.channels(); ++c) {
      out << ',' << format_sig(meas.values(c, static_cast<Eigen::Index>(k)));
    }
    out << "\n";
  }
}

MeasurementSeries read_measurements_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCategory::parse, origin + ": empty file");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t_s") {
    throw Error(ErrorCategory::parse, origin + ": first column must be t_s");
  }
  MeasurementSeries meas;
  int channels = 0;
  if (header.size() == 2 && header[1] == "T_p") {
    meas.sensor = SensorKind::bottom_point;
    channels = 1;
  } else {
    meas.sensor = SensorKind::full_field;
    channels = static_cast<int>(header.size()) - 1;
    for (int i = 1; i <= channels; ++i) {
      if (header[static_cast<std::size_t>(i)] != "T_" + std::to_string(i)) {
        throw Error(ErrorCategory::parse,
                    origin + ": expected column T_" + std::to_string(i));
      }
    }
    if (channels < 1) {
      throw Error(ErrorCategory::parse, origin + ": no measurement channels");
    }
  }

  std::vector<double> times;
  std::vector<double> flat;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (static_cast<int>(fields.size()) != channels + 1) {
      throw Error(ErrorCategory::parse, where + ": wrong field count");
    }
    times.push_back(to_double(fields[0], where));
    for (int c = 0; c < channels; ++c) {
      flat.push_back(to_double(fields[static_cast<std::size_t>(c) + 1], where));
    }
  }
  if (times.size() < 2) {
    throw Error(ErrorCategory::parse, origin + ": need at least two samples");
  }
  meas.period = times[1] - times[0];
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs((times[k] - times[k - 1]) - meas.period) > 1e-9) {
      throw Error(ErrorCategory::validation,
                  origin + ": sample spacing not uniform at row " + std::to_string(k));
    }
  }
  meas.times = std::move(times);
  meas.values.resize(channels, static_cast<Eigen::Index>(meas.times.size()));
  for (std::size_t k = 0; k < meas.times.size(); ++k) {
    for (int c = 0; c < channels; ++c) {
      meas.values(c, static_cast<Eigen::Index>(k)) =
          flat[k * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
    }
  }
  return meas;
}

void write_estimate_csv(std::ostream& out, const EstimateTrajectory& est,
                        const ErrorSeries* errors) {
  const int m = static_cast<int>(est.T_hat.rows());
  out << "t_s";
  for (int i = 1; i <= m; ++i) out << ",That_" << i;
  for (int i = 1; i <= m; ++i) out << ",cshat_" << i;
  if (errors) out << ",ec_avg,eT_avg";
  out << "\n";
  for (std::size_t k = 0; k < est.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    out << format_sig(est.times[k]);
    for (int i = 0; i < m; ++i) out << ',' << format_sig(est.T_hat(i, j));
    for (int i = 0; i < m; ++i) out << ',' << format_sig(est.c_s_hat(i, j));
    if (errors) {
      out << ',' << format_sig(errors->e_c_avg[k]) << ',' << format_sig(errors->e_T_avg[k]);
    }
    out << "\n";
  }
}

void write_closed_loop_csv(std::ostream& out, const ClosedLoopResult& result) {
  const int m = result.truth.cells();
  out << "t_s";
  for (int i = 1; i <= m; ++i) out << ",T_" << i;
  for (int i = 1; i <= m; ++i) out << ",cs_" << i;
  out << ",Qv_Wm3,Tmax_K\n";
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    const double t = result.times[k];
    if (t > result.truth.end_time() + 1e-9) break;
    out << format_sig(t);
    const Vec x = result.truth.at(t);
    for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << format_sig(x[i]);
    out << ',' << format_sig(result.Q_v[k]) << ',' << format_sig(result.T_max[k]) << "\n";
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "L_T,L_c,conv_time_s,stable,oscillatory,method\n";
  for (const auto& c : cells) {
    out << format_sig(c.L_T) << ',' << format_sig(c.L_c) << ','
        << (std::isnan(c.conv_time_s) ? std::string("nan") : format_sig(c.conv_time_s))
        << ',' << (c.stable ? 1 : 0) << ',' << (c.oscillatory ? 1 : 0) << ','
        << to_string(c.method) << "\n";
  }
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "t_s," << to_string(data.channel) << "\n";
  for (std::size_t i = 0; i < data.times.size(); ++i) {
    out << format_sig(data.times[i]) << ',' << format_sig(data.values[i]) << "\n";
  }
}

Dataset read_dataset_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCategory::parse, origin + ": empty file");
  }
  const auto header = split_csv_line(line);
  if (header.size() != 2 || header[0] != "t_s") {
    throw Error(ErrorCategory::parse,
                origin + ": dataset header must be 't_s,<channel>'");
  }
  Dataset data;
  data.channel = data_channel_from(header[1]);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields.size() != 2) {
      throw Error(ErrorCategory::parse, where + ": expected two fields");
    }
    data.times.push_back(to_double(fields[0], where));
    data.values.push_back(to_double(fields[1], where));
  }
  if (data.times.empty()) {
    throw Error(ErrorCategory::parse, origin + ": dataset has no rows");
  }
  return data;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot write '" + path + "'");
  }
  out << content;
}

}  // namespace secdry
