#include "rsflow/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "newton.hpp"
#include "rsflow/error.hpp"
#include "rsflow/geometry.hpp"
#include "stencils.hpp"
#include "time_loop.hpp"

namespace rsflow {

std::string_view to_string(SchemeKind kind) {
  return kind == SchemeKind::ExplicitRk4 ? "explicit-rk4" : "imex-cn";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "explicit-rk4") return SchemeKind::ExplicitRk4;
  if (name == "imex-cn") return SchemeKind::ImexCn;
  throw Error(ErrorKind::Config, "unknown scheme '" + std::string(name) + "'");
}

void SchemeConfig::validate() const {
  if (!(cfl_factor > 0.0 && cfl_factor <= 1.0)) {
    throw Error(ErrorKind::Config, "cfl_factor must lie in (0, 1]");
  }
  if (!(dt_max > 0.0)) throw Error(ErrorKind::Config, "dt_max must be positive");
  if (!(dt_min > 0.0) || dt_min > dt_max) {
    throw Error(ErrorKind::Config, "dt_min must be positive and below dt_max");
  }
  if (!(newton_tol > 0.0) || newton_max_iter < 1) {
    throw Error(ErrorKind::Config, "newton settings must be positive");
  }
}

BoundaryStencil apply_boundary(const RadialMetricState& state, double eta_value) {
  if (!(eta_value > 0.0)) {
    throw Error(ErrorKind::Config, "boundary mean curvature must be positive (got " +
                                       std::to_string(eta_value) + ")");
  }
  const std::size_t last = state.grid.last();
  const double h = state.grid.dr();
  const std::span<const double> b(state.b);
  BoundaryStencil out;
  out.slope = state.a[last] * eta_value * state.b[last] / (state.n - 1);
  out.b_rr = detail::robin_second(b, last, out.slope, h);
  out.ghost = detail::robin_ghost(b, last, out.slope, h);
  return out;
}

namespace {

// Shared kernel: rates of (a, b) with the Robin slope applied at r0.
// beta is scratch of grid size.
void metric_rates(std::span<const double> a, std::span<const double> b,
                  std::span<const double> r, std::span<const double> inv_r, double h, int n,
                  double eta_value, std::span<double> beta, std::span<double> da,
                  std::span<double> db) {
  if (!(eta_value > 0.0)) {
    throw Error(ErrorKind::Config, "boundary mean curvature must be positive");
  }
  const std::size_t last = a.size() - 1;
  const double inv_2h = 0.5 / h;
  const double inv_h2 = 1.0 / (h * h);
  const double nm1 = n - 1;
  const double nm2 = n - 2;

  for (std::size_t j = 1; j <= last; ++j) beta[j] = b[j] * inv_r[j];
  beta[0] = (4.0 * beta[1] - beta[2]) / 3.0;

  db[0] = 0.0;

  const double slope = a[last] * eta_value * b[last] / nm1;
  const double b_rr_last = detail::robin_second(b, last, slope, h);
  const double beta_ghost = (2.0 * b[last] - b[last - 1] + h * h * b_rr_last) / (r[last] + h);

  // a_r is taken upwind (backward) and the b_r inside b_s^2 downwind
  // (forward), both second order. Their product then reproduces the centered
  // b_rr stencil, which keeps the reparametrization modes of the fixed-r gauge
  // from growing like 1/r^2; centered first differences do not.
  for (std::size_t i = 1; i < last; ++i) {
    const double a_back = i >= 2 ? a[i - 2] : a[2 - i];
    const double a_r = (3.0 * a[i] - 4.0 * a[i - 1] + a_back) * inv_2h;
    const double b_r = beta[i] + r[i] * (beta[i + 1] - beta[i - 1]) * inv_2h;
    const double beta_2 = i + 2 <= last ? beta[i + 2] : beta_ghost;
    const double b_r_fwd = beta[i] + r[i] * (-3.0 * beta[i] + 4.0 * beta[i + 1] - beta_2) * inv_2h;
    const double b_rr = (b[i + 1] - 2.0 * b[i] + b[i - 1]) * inv_h2;
    const double inv_a = 1.0 / a[i];
    const double inv_b = 1.0 / b[i];
    const double b_s = b_r_fwd * inv_a;
    const double b_ss = (b_rr - a_r * b_r * inv_a) * inv_a * inv_a;
    da[i] = nm1 * a[i] * (b_ss * inv_b - 1.0);
    db[i] = b_ss - nm2 * (1.0 - b_s * b_s) * inv_b - nm1 * b[i];
  }

  const double a_r = detail::one_sided_first(a, last, inv_2h);
  const double b_rr = b_rr_last;
  const double inv_a = 1.0 / a[last];
  const double inv_b = 1.0 / b[last];
  const double b_s = slope * inv_a;
  const double b_ss = (b_rr - a_r * slope * inv_a) * inv_a * inv_a;
  db[last] = b_ss - nm2 * (1.0 - b_s * b_s) * inv_b - nm1 * b[last];
  // a has no boundary condition (its transport points outward) and the Robin
  // slope scales with a(r0), which feeds back at rate ~1/dr if a(r0) follows
  // its own equation. Quadratic extrapolation of the interior rates instead.
  da[last] = 3.0 * da[last - 1] - 3.0 * da[last - 2] + da[last - 3];

  // Smoothness at the pole means a(0) = b_r(0) = lim b/r. The a-equation
  // itself is anti-diffusive at r = 0 (K(0) carries +a''(0)), so a_0 follows
  // the extrapolated b/r instead.
  da[0] = (4.0 * db[1] * inv_r[1] - db[2] * inv_r[2]) / 3.0;
}

std::vector<double> inverse_radii(const RadialGrid& grid) {
  std::vector<double> inv(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) inv[i] = 1.0 / grid[i];
  return inv;
}

bool positive(const RadialMetricState& s) {
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    if (!(s.a[i] > 0.0) || !std::isfinite(s.a[i])) return false;
  }
  for (std::size_t i = 1; i < s.b.size(); ++i) {
    if (!(s.b[i] > 0.0) || !std::isfinite(s.b[i])) return false;
  }
  return true;
}

}  // namespace

MetricRates rhs(const RadialMetricState& state, double eta_value) {
  state.validate();
  const std::size_t count = state.grid.size();
  MetricRates out{std::vector<double>(count), std::vector<double>(count)};
  std::vector<double> beta(count);
  const auto inv_r = inverse_radii(state.grid);
  metric_rates(state.a, state.b, state.grid.r(), inv_r, state.grid.dr(), state.n, eta_value, beta,
               out.da_dt, out.db_dt);
  return out;
}

MetricRates rhs(const RadialMetricState& state, double t, const BackgroundModel& model,
                const RhoSpec& rho) {
  return rhs(state, eta(t, model, rho));
}

double stable_dt(const RadialMetricState& state, const SchemeConfig& scheme) {
  if (scheme.kind == SchemeKind::ImexCn) return scheme.dt_max;
  const double a_min = *std::min_element(state.a.begin(), state.a.end());
  const double ds = a_min * state.grid.dr();
  return std::min(scheme.dt_max, scheme.cfl_factor * ds * ds);
}

FlowStepper::FlowStepper(BackgroundModel model, RhoSpec rho, SchemeConfig scheme)
    : model_(model), rho_(std::move(rho)), scheme_(scheme) {
  model_.validate();
  scheme_.validate();
}

void FlowStepper::evaluate(const std::vector<double>& a, const std::vector<double>& b, double t,
                           std::vector<double>& da, std::vector<double>& db) {
  metric_rates(a, b, grid_.r(), inv_r_, grid_.dr(), model_.n, eta_at(t), beta_, da, db);
}

RadialMetricState FlowStepper::step(const RadialMetricState& state, double dt) {
  if (!(grid_ == state.grid) || inv_r_.size() != state.grid.size()) {
    grid_ = state.grid;
    inv_r_ = inverse_radii(grid_);
    const std::size_t count = grid_.size();
    beta_.assign(count, 0.0);
    for (auto& k : ka_) k.assign(count, 0.0);
    for (auto& k : kb_) k.assign(count, 0.0);
    stage_a_.assign(count, 0.0);
    stage_b_.assign(count, 0.0);
  }
  if (state.n != model_.n) throw Error(ErrorKind::Config, "state dimension differs from model");
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "time step must be positive");

  RadialMetricState out = state;
  if (scheme_.kind == SchemeKind::ExplicitRk4) {
    rk4(state, dt, out);
  } else {
    imex_cn(state, dt, out);
  }
  out.t = state.t + dt;
  out.b[0] = 0.0;
  if (!positive(out)) {
    throw Error(ErrorKind::StepRejected, "metric lost positivity at t = " + std::to_string(out.t));
  }
  return out;
}

void FlowStepper::rk4(const RadialMetricState& in, double dt, RadialMetricState& out) {
  const std::size_t count = in.a.size();
  const double t = in.t;
  const auto& a = in.a;
  const auto& b = in.b;

  evaluate(a, b, t, ka_[0], kb_[0]);
  for (std::size_t i = 0; i < count; ++i) {
    stage_a_[i] = a[i] + 0.5 * dt * ka_[0][i];
    stage_b_[i] = b[i] + 0.5 * dt * kb_[0][i];
  }
  evaluate(stage_a_, stage_b_, t + 0.5 * dt, ka_[1], kb_[1]);
  for (std::size_t i = 0; i < count; ++i) {
    stage_a_[i] = a[i] + 0.5 * dt * ka_[1][i];
    stage_b_[i] = b[i] + 0.5 * dt * kb_[1][i];
  }
  evaluate(stage_a_, stage_b_, t + 0.5 * dt, ka_[2], kb_[2]);
  for (std::size_t i = 0; i < count; ++i) {
    stage_a_[i] = a[i] + dt * ka_[2][i];
    stage_b_[i] = b[i] + dt * kb_[2][i];
  }
  evaluate(stage_a_, stage_b_, t + dt, ka_[3], kb_[3]);

  const double w = dt / 6.0;
  for (std::size_t i = 0; i < count; ++i) {
    out.a[i] = a[i] + w * (ka_[0][i] + 2.0 * ka_[1][i] + 2.0 * ka_[2][i] + ka_[3][i]);
    out.b[i] = b[i] + w * (kb_[0][i] + 2.0 * kb_[1][i] + 2.0 * kb_[2][i] + kb_[3][i]);
  }
}

// Trapezoidal rule on the coupled system: b by Crank-Nicolson, and a by
// a_new (1 + dt/2 P_new) = a_old (1 - dt/2 P_old), which is the trapezoidal
// rule for a_t = -P a. Both are solved together by Newton's method on the
// interleaved unknowns (a_0, b_0, a_1, b_1, ...).
void FlowStepper::imex_cn(const RadialMetricState& in, double dt, RadialMetricState& out) {
  const std::size_t count = in.a.size();
  evaluate(in.a, in.b, in.t, ka_[0], kb_[0]);

  std::vector<double> c(2 * count), y(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    c[2 * i] = in.a[i] + 0.5 * dt * ka_[0][i];
    c[2 * i + 1] = in.b[i] + 0.5 * dt * kb_[0][i];
    y[2 * i] = in.a[i];
    y[2 * i + 1] = in.b[i];
  }

  const double t_new = in.t + dt;
  const detail::VectorField field = [&](const std::vector<double>& v, std::vector<double>& f) {
    for (std::size_t i = 0; i < count; ++i) {
      stage_a_[i] = v[2 * i];
      stage_b_[i] = v[2 * i + 1];
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!(stage_a_[i] > 0.0) || (i > 0 && !(stage_b_[i] > 0.0))) {
        std::fill(f.begin(), f.end(), std::numeric_limits<double>::quiet_NaN());
        return;
      }
    }
    evaluate(stage_a_, stage_b_, t_new, ka_[1], kb_[1]);
    for (std::size_t i = 0; i < count; ++i) {
      f[2 * i] = ka_[1][i];
      f[2 * i + 1] = kb_[1][i];
    }
  };

  if (!detail::trapezoid_newton(field, c, 0.5 * dt, y, 7, scheme_.newton_tol,
                                scheme_.newton_max_iter)) {
    throw Error(ErrorKind::NewtonDivergence,
                "Crank-Nicolson iteration did not converge at t = " + std::to_string(t_new));
  }
  for (std::size_t i = 0; i < count; ++i) {
    out.a[i] = y[2 * i];
    out.b[i] = y[2 * i + 1];
  }
}

RadialMetricState step(const RadialMetricState& state, double dt, const SchemeConfig& scheme,
                       const BackgroundModel& model, const RhoSpec& rho) {
  FlowStepper stepper(model, rho, scheme);
  return stepper.step(state, dt);
}

std::vector<double> cadence(double interval, double t_end) {
  if (!(interval > 0.0)) throw Error(ErrorKind::Config, "snapshot interval must be positive");
  std::vector<double> times;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * interval;
    if (t > t_end * (1.0 + 1e-12)) break;
    times.push_back(std::min(t, t_end));
  }
  return times;
}

TimeSeriesRecord make_record(const RadialMetricState& state, double dt, const BackgroundModel& model,
                             const RhoSpec& rho, double r_compact) {
  TimeSeriesRecord rec;
  rec.t = state.t;
  rec.dt = dt;
  rec.eta = eta(state.t, model, rho);
  const CurvatureFields f = curvature(state, xi(state.t, model), rec.eta);
  rec.volume = volume(state);
  rec.h_boundary = mean_curvature_at(state, state.grid.last());
  rec.min_f1 = *std::min_element(f.F1.begin(), f.F1.end());
  rec.max_f1 = *std::max_element(f.F1.begin(), f.F1.end());
  rec.min_f2 = *std::min_element(f.F2.begin(), f.F2.end());
  rec.max_f2 = *std::max_element(f.F2.begin(), f.F2.end());
  const double r_limit = r_compact * state.grid.r0() * (1.0 + 1e-12);
  for (std::size_t i = 0; i < state.grid.size() && state.grid[i] <= r_limit; ++i) {
    rec.sup_f1_compact = std::max(rec.sup_f1_compact, std::abs(f.F1[i]));
  }
  if (state.n == 2) {
    const double root_m = std::sqrt(state.m);
    rec.u_min = std::numeric_limits<double>::infinity();
    for (double a : state.a) rec.u_min = std::min(rec.u_min, std::log(a / root_m));
  }
  return rec;
}

Trajectory integrate(const RadialMetricState& start, const BackgroundModel& model,
                     const RhoSpec& rho, const SchemeConfig& scheme,
                     const IntegrationSettings& settings) {
  start.validate();
  Trajectory traj;
  FlowStepper stepper(model, rho, scheme);
  const auto result = detail::run_time_loop(
      start, settings, scheme.dt_min,
      [&](const RadialMetricState& s, double dt) { return stepper.step(s, dt); },
      [&](const RadialMetricState& s) { return stable_dt(s, scheme); },
      [&](const RadialMetricState& s) { traj.snapshots.push_back(s); },
      [&](const RadialMetricState& s, double dt) {
        traj.records.push_back(make_record(s, dt, model, rho, settings.r_compact));
      });
  traj.stats = result.stats;
  traj.aborted = result.aborted;
  traj.abort_reason = result.abort_reason;
  return traj;
}

}  // namespace rsflow
