#include "secdry/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace secdry {

const char* to_string(DataChannel c) {
  switch (c) {
    case DataChannel::T_avg: return "T_avg_K";
    case DataChannel::T_bottom: return "T_p_K";
    case DataChannel::c_s_avg: return "cs_avg";
  }
  return "?";
}

DataChannel data_channel_from(const std::string& name) {
  if (name == "T_avg_K" || name == "T_avg") return DataChannel::T_avg;
  if (name == "T_p_K" || name == "T_p" || name == "T_bottom") return DataChannel::T_bottom;
  if (name == "cs_avg" || name == "c_s_avg") return DataChannel::c_s_avg;
  throw Error(ErrorCategory::parse, "unknown data channel '" + name + "'");
}

namespace {

double channel_value(const Trajectory& traj, double t, DataChannel ch) {
  switch (ch) {
    case DataChannel::T_avg: return traj.T_avg_at(t);
    case DataChannel::T_bottom: {
      const Vec x = traj.at(t);
      return x[traj.cells() - 1];
    }
    case DataChannel::c_s_avg: return traj.c_s_avg_at(t);
  }
  return 0.0;
}

double dataset_weight(const Dataset& d, bool joint) {
  if (!joint) return 1.0;
  // joint fits weight channels by the inverse data variance
  const double n = static_cast<double>(d.values.size());
  double mean = 0.0;
  for (double v : d.values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : d.values) var += (v - mean) * (v - mean);
  var /= std::max(1.0, n - 1.0);
  return 1.0 / std::max(var, 1e-12);
}

}  // namespace

double fit_loss(const FitProblem& problem, const ModelParameters& candidate,
                std::vector<double>* residuals) {
  double t_end = 0.0;
  for (const auto& d : problem.data) {
    for (double t : d.times) t_end = std::max(t_end, t);
  }
  Trajectory traj;
  try {
    traj = integrate(candidate, problem.sched, nullptr, 0.0, t_end, problem.settings);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();  // penalized draw
  }
  const bool joint = problem.data.size() > 1;
  double loss = 0.0;
  if (residuals) residuals->clear();
  for (const auto& d : problem.data) {
    const double w = dataset_weight(d, joint);
    for (std::size_t i = 0; i < d.times.size(); ++i) {
      const double r = channel_value(traj, d.times[i], d.channel) - d.values[i];
      loss += w * r * r;
      if (residuals) residuals->push_back(r);
    }
  }
  return loss;
}

namespace {

struct Space {
  // generic n-dim bounded search in transformed coordinates
  std::vector<double> lo, hi;           // transformed bounds
  std::vector<bool> log_scale;

  double to_internal(double v, std::size_t i) const {
    return log_scale[i] ? std::log(v) : v;
  }
  double to_physical(double v, std::size_t i) const {
    return log_scale[i] ? std::exp(v) : v;
  }
};

ModelParameters apply(const FitProblem& prob, const Space& sp,
                      const std::vector<double>& theta) {
  ModelParameters p = prob.base;
  if (prob.which == FitParameterSet::heat_transfer) {
    p.h = sp.to_physical(theta[0], 0);
  } else {
    p.A = sp.to_physical(theta[0], 0);
    p.E_a = sp.to_physical(theta[1], 1);
  }
  return p;
}

}  // namespace

FitResult fit(const FitProblem& problem, long budget) {
  if (problem.data.empty()) {
    throw Error(ErrorCategory::invalid_parameter, "fit needs at least one dataset");
  }
  for (const auto& d : problem.data) {
    if (d.times.empty() || d.times.size() != d.values.size()) {
      throw Error(ErrorCategory::invalid_parameter, "dataset times/values inconsistent");
    }
  }

  Space sp;
  std::vector<double> theta0;
  if (problem.which == FitParameterSet::heat_transfer) {
    sp.lo = {std::log(problem.h_lo)};
    sp.hi = {std::log(problem.h_hi)};
    sp.log_scale = {true};
    theta0 = {std::clamp(std::log(problem.base.h), sp.lo[0], sp.hi[0])};
  } else {
    sp.lo = {std::log(problem.A_lo), problem.Ea_lo};
    sp.hi = {std::log(problem.A_hi), problem.Ea_hi};
    sp.log_scale = {true, false};
    theta0 = {std::clamp(std::log(problem.base.A), sp.lo[0], sp.hi[0]),
              std::clamp(problem.base.E_a, sp.lo[1], sp.hi[1])};
  }
  const std::size_t dim = sp.lo.size();

  FitResult result;
  long evals = 0;
  auto evaluate = [&](const std::vector<double>& theta) {
    ++evals;
    return fit_loss(problem, apply(problem, sp, theta));
  };

  std::vector<double> best = theta0;
  double best_loss = evaluate(theta0);
  result.best_loss_history.push_back(best_loss);

  // Stage 1: coarse grid over the box.
  const int n_grid = dim == 1 ? 17 : 9;
  const long n_cells = static_cast<long>(std::pow(n_grid, dim));
  for (long cell = 0; cell < n_cells && evals < budget; ++cell) {
    std::vector<double> theta(dim);
    long rest = cell;
    for (std::size_t d = 0; d < dim; ++d) {
      const int idx = static_cast<int>(rest % n_grid);
      rest /= n_grid;
      theta[d] = sp.lo[d] + (sp.hi[d] - sp.lo[d]) * idx / (n_grid - 1);
    }
    const double loss = evaluate(theta);
    if (loss < best_loss) {
      best_loss = loss;
      best = theta;
    }
    result.best_loss_history.push_back(best_loss);
  }

  // Stage 2: pattern search from the best grid point. The poll stencil
  // includes the diagonals: (A, E_a) are strongly correlated, and an
  // axis-only compass crawls along the curved valley.
  std::vector<std::vector<double>> directions;
  for (std::size_t d = 0; d < dim; ++d) {
    for (const double sgn : {+1.0, -1.0}) {
      std::vector<double> dir(dim, 0.0);
      dir[d] = sgn;
      directions.push_back(dir);
    }
  }
  if (dim > 1) {
    const long n_corners = 1L << dim;
    for (long c = 0; c < n_corners; ++c) {
      std::vector<double> dir(dim);
      for (std::size_t d = 0; d < dim; ++d) dir[d] = (c >> d) & 1 ? 1.0 : -1.0;
      directions.push_back(dir);
    }
  }

  std::vector<double> step(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    step[d] = (sp.hi[d] - sp.lo[d]) / (n_grid - 1);
  }
  const double step_tol_factor = 2e-5;  // of the box width
  while (evals < budget) {
    bool improved = false;
    std::vector<double> candidate = best;
    double candidate_loss = best_loss;
    for (const auto& dir : directions) {
      if (evals >= budget) break;
      std::vector<double> theta = best;
      bool moved = false;
      for (std::size_t d = 0; d < dim; ++d) {
        const double next = std::clamp(theta[d] + dir[d] * step[d], sp.lo[d], sp.hi[d]);
        if (next != theta[d]) moved = true;
        theta[d] = next;
      }
      if (!moved) continue;
      const double loss = evaluate(theta);
      if (loss < candidate_loss) {
        candidate_loss = loss;
        candidate = theta;
        improved = true;
      }
    }
    if (improved) {
      best = candidate;
      best_loss = candidate_loss;
    } else {
      bool any_above_tol = false;
      for (std::size_t d = 0; d < dim; ++d) {
        step[d] *= 0.5;
        if (step[d] > step_tol_factor * (sp.hi[d] - sp.lo[d])) any_above_tol = true;
      }
      if (!any_above_tol) break;
    }
    result.best_loss_history.push_back(best_loss);
  }

  result.params = apply(problem, sp, best);
  result.loss = fit_loss(problem, result.params, &result.residuals);
  result.evaluations = evals + 1;
  result.budget_exhausted = evals >= budget;
  return result;
}

}  // namespace secdry
