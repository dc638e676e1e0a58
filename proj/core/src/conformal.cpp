#include "rsflow/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "newton.hpp"
#include "rsflow/error.hpp"
#include "stencils.hpp"
#include "time_loop.hpp"

namespace rsflow {

void ConformalState::validate() const {
  if (model.n != 2) throw Error(ErrorKind::Config, "the conformal formulation is two-dimensional");
  model.validate();
  if (u.size() != grid.size() || grid.size() < RadialGrid::kMinPoints) {
    throw Error(ErrorKind::InvalidState, "u does not match the grid");
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidState, "u is not finite");
  }
}

ConformalState initial_conformal_state(const RadialGrid& grid, const BackgroundModel& model) {
  ConformalState state;
  state.grid = grid;
  state.model = model;
  state.u.assign(grid.size(), 0.0);
  state.validate();
  return state;
}

RadialMetricState to_metric_state(const ConformalState& state) {
  RadialMetricState out;
  out.t = state.t;
  out.grid = state.grid;
  out.n = 2;
  out.m = state.model.m;
  const double root_m = std::sqrt(state.model.m);
  out.a.resize(state.u.size());
  out.b.resize(state.u.size());
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    const double scale = root_m * std::exp(state.u[i]);
    out.a[i] = scale;
    out.b[i] = scale * std::sinh(state.grid[i]);
  }
  out.b[0] = 0.0;
  return out;
}

namespace {

double robin_slope(double u_boundary, double eta_value, const BackgroundModel& model) {
  return std::sqrt(model.m) * eta_value * std::exp(u_boundary) - 1.0 / std::tanh(model.r0);
}

void conformal_rates(std::span<const double> u, std::span<const double> coth_r, double h,
                     double m, double eta_value, const BackgroundModel& model,
                     std::span<double> du) {
  const std::size_t last = u.size() - 1;
  const double inv_2h = 0.5 / h;
  const double inv_h2 = 1.0 / (h * h);
  const double inv_m = 1.0 / m;

  const double lap0 = 2.0 * (2.0 * (u[1] - u[0]) * inv_h2) * inv_m;
  du[0] = std::exp(-2.0 * u[0]) * (lap0 + inv_m) - 1.0;
  for (std::size_t i = 1; i < last; ++i) {
    const double u_r = (u[i + 1] - u[i - 1]) * inv_2h;
    const double u_rr = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2;
    const double lap = (u_rr + coth_r[i] * u_r) * inv_m;
    du[i] = std::exp(-2.0 * u[i]) * (lap + inv_m) - 1.0;
  }
  const double slope = robin_slope(u[last], eta_value, model);
  const double u_rr = detail::robin_second(u, last, slope, h);
  const double lap = (u_rr + coth_r[last] * slope) * inv_m;
  du[last] = std::exp(-2.0 * u[last]) * (lap + inv_m) - 1.0;
}

std::vector<double> coth_of_radii(const RadialGrid& grid) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) out[i] = 1.0 / std::tanh(grid[i]);
  return out;
}

}  // namespace

ConformalBoundary conformal_boundary(const ConformalState& state, double eta_value) {
  const std::size_t last = state.grid.last();
  const double h = state.grid.dr();
  const std::span<const double> u(state.u);
  ConformalBoundary out;
  out.slope = robin_slope(state.u[last], eta_value, state.model);
  out.u_rr = detail::robin_second(u, last, out.slope, h);
  out.ghost = detail::robin_ghost(u, last, out.slope, h);
  return out;
}

std::vector<double> conformal_rhs(const ConformalState& state, double eta_value) {
  state.validate();
  std::vector<double> du(state.u.size());
  const auto coth_r = coth_of_radii(state.grid);
  conformal_rates(state.u, coth_r, state.grid.dr(), state.model.m, eta_value, state.model, du);
  return du;
}

double conformal_stable_dt(const ConformalState& state, const SchemeConfig& scheme) {
  if (scheme.kind == SchemeKind::ImexCn) return scheme.dt_max;
  const double u_min = *std::min_element(state.u.begin(), state.u.end());
  const double ds = std::sqrt(state.model.m) * std::exp(u_min) * state.grid.dr();
  return std::min(scheme.dt_max, scheme.cfl_factor * ds * ds);
}

ConformalStepper::ConformalStepper(BackgroundModel model, RhoSpec rho, SchemeConfig scheme)
    : model_(model), rho_(std::move(rho)), scheme_(scheme) {
  if (model_.n != 2) throw Error(ErrorKind::Config, "the conformal formulation is two-dimensional");
  model_.validate();
  scheme_.validate();
}

void ConformalStepper::evaluate(const std::vector<double>& u, double t, std::vector<double>& du) {
  conformal_rates(u, coth_r_, grid_.dr(), model_.m, eta(t, model_, rho_), model_, du);
}

ConformalState ConformalStepper::step(const ConformalState& state, double dt) {
  if (!(grid_ == state.grid) || coth_r_.size() != state.grid.size()) {
    grid_ = state.grid;
    coth_r_ = coth_of_radii(grid_);
    for (auto& k : k_) k.assign(grid_.size(), 0.0);
    stage_.assign(grid_.size(), 0.0);
  }
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "time step must be positive");
  const std::size_t count = state.u.size();
  const auto& u = state.u;
  const double t = state.t;
  ConformalState out = state;

  if (scheme_.kind == SchemeKind::ExplicitRk4) {
    evaluate(u, t, k_[0]);
    for (std::size_t i = 0; i < count; ++i) stage_[i] = u[i] + 0.5 * dt * k_[0][i];
    evaluate(stage_, t + 0.5 * dt, k_[1]);
    for (std::size_t i = 0; i < count; ++i) stage_[i] = u[i] + 0.5 * dt * k_[1][i];
    evaluate(stage_, t + 0.5 * dt, k_[2]);
    for (std::size_t i = 0; i < count; ++i) stage_[i] = u[i] + dt * k_[2][i];
    evaluate(stage_, t + dt, k_[3]);
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < count; ++i) {
      out.u[i] = u[i] + w * (k_[0][i] + 2.0 * k_[1][i] + 2.0 * k_[2][i] + k_[3][i]);
    }
  } else {
    evaluate(u, t, k_[0]);
    std::vector<double> c(count);
    for (std::size_t i = 0; i < count; ++i) c[i] = u[i] + 0.5 * dt * k_[0][i];
    const double t_new = t + dt;
    const detail::VectorField field = [&](const std::vector<double>& v, std::vector<double>& f) {
      evaluate(v, t_new, f);
    };
    if (!detail::trapezoid_newton(field, c, 0.5 * dt, out.u, 2, scheme_.newton_tol,
                                  scheme_.newton_max_iter)) {
      throw Error(ErrorKind::NewtonDivergence,
                  "Crank-Nicolson iteration did not converge at t = " + std::to_string(t_new));
    }
  }
  out.t = t + dt;
  for (double v : out.u) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::StepRejected, "u is not finite at t = " + std::to_string(out.t));
    }
  }
  return out;
}

ConformalTrajectory integrate_conformal(const ConformalState& start, const RhoSpec& rho,
                                        const SchemeConfig& scheme,
                                        const IntegrationSettings& settings) {
  start.validate();
  ConformalTrajectory traj;
  ConformalStepper stepper(start.model, rho, scheme);
  const auto result = detail::run_time_loop(
      start, settings, scheme.dt_min,
      [&](const ConformalState& s, double dt) { return stepper.step(s, dt); },
      [&](const ConformalState& s) { return conformal_stable_dt(s, scheme); },
      [&](const ConformalState& s) { traj.snapshots.push_back(s); },
      [&](const ConformalState& s, double dt) {
        TimeSeriesRecord rec = make_record(to_metric_state(s), dt, s.model, rho, settings.r_compact);
        rec.u_min = *std::min_element(s.u.begin(), s.u.end());
        traj.records.push_back(rec);
      });
  traj.stats = result.stats;
  traj.aborted = result.aborted;
  traj.abort_reason = result.abort_reason;
  return traj;
}

DiscrepancyReport cross_check(const Trajectory& ab, const ConformalTrajectory& conformal) {
  if (ab.snapshots.size() != conformal.snapshots.size() || ab.snapshots.empty()) {
    throw Error(ErrorKind::Config, "trajectories have different snapshot counts");
  }
  DiscrepancyReport report;
  for (std::size_t k = 0; k < ab.snapshots.size(); ++k) {
    const RadialMetricState& s = ab.snapshots[k];
    const ConformalState& c = conformal.snapshots[k];
    if (!(s.grid == c.grid) || s.n != 2 || s.m != c.model.m) {
      throw Error(ErrorKind::Config, "trajectories use different grids or models");
    }
    if (std::abs(s.t - c.t) > 1e-12 * std::max(1.0, s.t)) {
      throw Error(ErrorKind::Config, "snapshot times differ");
    }
    const RadialMetricState image = to_metric_state(c);
    for (std::size_t i = 0; i < s.a.size(); ++i) {
      const double da = std::abs(s.a[i] - image.a[i]) / s.a[i];
      if (da > report.max_rel_a) {
        report.max_rel_a = da;
        if (da >= report.max_rel_b) {
          report.worst_t = s.t;
          report.worst_r = s.grid[i];
        }
      }
      if (i == 0) continue;
      const double db = std::abs(s.b[i] - image.b[i]) / s.b[i];
      if (db > report.max_rel_b) {
        report.max_rel_b = db;
        if (db >= report.max_rel_a) {
          report.worst_t = s.t;
          report.worst_r = s.grid[i];
        }
      }
    }
    ++report.snapshots_compared;
  }
  return report;
}

}  // namespace rsflow
