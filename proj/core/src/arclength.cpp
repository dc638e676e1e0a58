#include "rsflow/arclength.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "rsflow/error.hpp"
#include "time_loop.hpp"

namespace rsflow {

namespace {

// Pole slope of B in x; equals S when b_s(0) = 1. B/x is even, so this is a
// cubic extrapolation in x^2 through four nodes.
double pole_slope(std::span<const double> B) {
  const double cells = static_cast<double>(B.size() - 1);
  return (1.6 * B[1] - 0.4 * B[2] + 8.0 * B[3] / 105.0 - B[4] / 140.0) * cells;
}

// Cubic Lagrange interpolation of nodal values f at x in [0, 1]. parity = +1
// or -1 extends f evenly or oddly across the pole.
double interp(std::span<const double> f, double x, double parity) {
  const std::size_t cells = f.size() - 1;
  const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(cells);
  long j = static_cast<long>(std::floor(pos)) - 1;
  j = std::min<long>(j, static_cast<long>(cells) - 3);
  const double u = pos - static_cast<double>(j);
  auto value = [&](long k) { return k < 0 ? parity * f[static_cast<std::size_t>(-k)] : f[static_cast<std::size_t>(k)]; };
  const double f0 = value(j), f1 = value(j + 1), f2 = value(j + 2), f3 = value(j + 3);
  return -f0 * (u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0 + f1 * u * (u - 2.0) * (u - 3.0) / 2.0 -
         f2 * u * (u - 1.0) * (u - 3.0) / 2.0 + f3 * u * (u - 1.0) * (u - 2.0) / 6.0;
}

struct Kernel {
  std::vector<double> beta, b_s, b_ss, k, V;
};

// Nodal b_s, b_ss, k = b_ss/b and V on the s-grid, given S = pole_slope(B).
void fill_kernel(std::span<const double> B, double S, int n, double eta_value, Kernel& w) {
  const std::size_t M = B.size() - 1;
  const double d = S / static_cast<double>(M);
  const double inv_2d = 0.5 / d;
  const double inv_d2 = 1.0 / (d * d);
  // The five-point b_ss divides by this instead of d^2, which makes it exact
  // on e^{+-s}; the flow tends to K = -1 and the plain stencil would leave a
  // d^4/90 floor there. It equals d^2 - d^6/90 + ..., so the order is kept.
  const double sh_half = std::sinh(0.5 * d);
  const double sh = std::sinh(d);
  const double inv_fit = 12.0 / (64.0 * sh_half * sh_half - 4.0 * sh * sh);
  const double nm1 = n - 1;
  w.beta.resize(M + 1);
  w.b_s.resize(M + 1);
  w.b_ss.resize(M + 1);
  w.k.resize(M + 1);
  w.V.resize(M + 1);
  w.beta[0] = 1.0;
  for (std::size_t j = 1; j <= M; ++j) w.beta[j] = B[j] / (d * static_cast<double>(j));

  // Fourth order throughout, using that B is odd and beta even across the
  // pole and, at r0, a ghost node from the quartic through B_{M-3..M} with
  // the Robin slope.
  const double slope = eta_value * B[M] / nm1;
  const double ghost = -10.0 / 3.0 * B[M] + 6.0 * B[M - 1] - 2.0 * B[M - 2] + B[M - 3] / 3.0 + 4.0 * d * slope;
  auto B_at = [&](long j) {
    if (j < 0) return -B[static_cast<std::size_t>(-j)];
    return static_cast<std::size_t>(j) > M ? ghost : B[static_cast<std::size_t>(j)];
  };
  auto beta_at = [&](long j) {
    if (static_cast<std::size_t>(j) == M + 1) return ghost / (d * static_cast<double>(M + 1));
    return w.beta[static_cast<std::size_t>(j < 0 ? -j : j)];
  };
  w.b_s[0] = 1.0;
  w.b_ss[0] = 0.0;
  for (std::size_t j = 1; j < M; ++j) {
    const long i = static_cast<long>(j);
    const double s = d * static_cast<double>(j);
    w.b_s[j] = w.beta[j] + s * (8.0 * (beta_at(i + 1) - beta_at(i - 1)) - beta_at(i + 2) + beta_at(i - 2)) * inv_2d / 6.0;
    w.b_ss[j] = (16.0 * (B_at(i + 1) + B_at(i - 1)) - 30.0 * B[j] - B_at(i + 2) - B_at(i - 2)) * inv_fit / 12.0;
    w.k[j] = w.b_ss[j] / B[j];
  }
  // k(0) by even extrapolation from k_1..k_3. A separate pole formula for
  // beta''(0) is more accurate on its own but disagrees with the interior
  // stencil at O(d^4), and the flow turns that disagreement into a bump at
  // the pole.
  w.k[0] = 1.5 * w.k[1] - 0.6 * w.k[2] + 0.1 * w.k[3];
  w.b_s[M] = slope;
  w.b_ss[M] = (-85.0 / 18.0 * B[M] + 6.0 * B[M - 1] - 1.5 * B[M - 2] + 2.0 / 9.0 * B[M - 3] + 11.0 / 3.0 * d * slope) * inv_d2;
  w.k[M] = w.b_ss[M] / B[M];

  // Trapezoid with the endpoint derivative correction; f = (n-1)(k-1) is even
  // at the pole.
  auto f = [&](std::size_t j) { return nm1 * (w.k[j] - 1.0); };
  auto f_s = [&](std::size_t j) {
    if (j == 0) return 0.0;
    if (j == M) return (3.0 * f(M) - 4.0 * f(M - 1) + f(M - 2)) * inv_2d;
    return (f(j + 1) - f(j - 1)) * inv_2d;
  };
  w.V[0] = 0.0;
  for (std::size_t j = 1; j <= M; ++j) {
    w.V[j] = w.V[j - 1] + 0.5 * d * (f(j) + f(j - 1)) - d * d / 12.0 * (f_s(j) - f_s(j - 1));
  }
}

// Flat layout: B[0..M], label_x[0..L], alpha[0..L].
void flat_rates(std::span<const double> y, std::size_t M, std::size_t L, int n, double eta_value,
                Kernel& w, std::span<double> dy) {
  const std::span<const double> B = y.subspan(0, M + 1);
  const std::span<const double> lx = y.subspan(M + 1, L + 1);
  const std::span<const double> alpha = y.subspan(M + L + 2, L + 1);
  const double S = pole_slope(B);
  fill_kernel(B, S, n, eta_value, w);
  const double nm1 = n - 1;
  const double nm2 = n - 2;
  const double VS = w.V[M];

  dy[0] = 0.0;
  for (std::size_t j = 1; j <= M; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(M);
    const double b_s = w.b_s[j];
    dy[j] = w.b_ss[j] - nm2 * (1.0 - b_s * b_s) / B[j] - nm1 * B[j] + b_s * (x * VS - w.V[j]);
  }
  for (std::size_t i = 0; i <= L; ++i) {
    const double x = lx[i];
    const double k = interp(w.k, x, 1.0);
    dy[M + 1 + i] = (i == 0 || i == L) ? 0.0 : (interp(w.V, x, -1.0) - x * VS) / S;
    dy[M + L + 2 + i] = nm1 * (k - 1.0) * alpha[i];
  }
}

void pack(const ArclengthState& s, std::vector<double>& y) {
  y.clear();
  y.insert(y.end(), s.B.begin(), s.B.end());
  y.insert(y.end(), s.label_x.begin(), s.label_x.end());
  y.insert(y.end(), s.alpha.begin(), s.alpha.end());
}

void unpack(const std::vector<double>& y, ArclengthState& s) {
  const std::size_t M = s.B.size() - 1;
  const std::size_t L = s.label_x.size() - 1;
  std::copy_n(y.begin(), M + 1, s.B.begin());
  std::copy_n(y.begin() + static_cast<long>(M + 1), L + 1, s.label_x.begin());
  std::copy_n(y.begin() + static_cast<long>(M + L + 2), L + 1, s.alpha.begin());
}

}  // namespace

double ArclengthState::total_length() const { return pole_slope(B); }

void ArclengthState::validate() const {
  if (B.size() < 8) throw Error(ErrorKind::InvalidState, "too few arclength cells");
  if (label_x.size() != grid.size() || alpha.size() != grid.size() ||
      grid.size() < RadialGrid::kMinPoints) {
    throw Error(ErrorKind::InvalidState, "labels do not match the reference grid");
  }
  if (B[0] != 0.0) throw Error(ErrorKind::InvalidState, "B must vanish at the pole");
  for (std::size_t j = 1; j < B.size(); ++j) {
    if (!(B[j] > 0.0) || !std::isfinite(B[j])) throw Error(ErrorKind::InvalidState, "B must be positive");
  }
  if (label_x.front() != 0.0 || label_x.back() != 1.0) {
    throw Error(ErrorKind::InvalidState, "labels must span [0, 1]");
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) {
      throw Error(ErrorKind::InvalidState, "a must be positive");
    }
    if (i > 0 && !(label_x[i] > label_x[i - 1])) {
      throw Error(ErrorKind::InvalidState, "labels must increase");
    }
  }
}

ArclengthState initial_arclength_state(const RadialGrid& grid, std::size_t cells, int n, double m) {
  ArclengthState s;
  s.n = n;
  s.m = m;
  s.grid = grid;
  const double root_m = std::sqrt(m);
  const double r0 = grid.r0();
  s.B.resize(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) {
    s.B[j] = root_m * std::sinh(r0 * static_cast<double>(j) / static_cast<double>(cells));
  }
  s.label_x.resize(grid.size());
  s.alpha.assign(grid.size(), root_m);
  for (std::size_t i = 0; i < grid.size(); ++i) s.label_x[i] = grid[i] / r0;
  s.label_x.back() = 1.0;
  s.validate();
  return s;
}

RadialMetricState to_metric_state(const ArclengthState& state) {
  RadialMetricState out;
  out.t = state.t;
  out.grid = state.grid;
  out.n = state.n;
  out.m = state.m;
  out.a = state.alpha;
  const std::size_t M = state.cells();
  const double S = state.total_length();
  std::vector<double> beta(M + 1);
  beta[0] = 1.0;
  for (std::size_t j = 1; j <= M; ++j) beta[j] = state.B[j] / (S * static_cast<double>(j) / M);
  out.b.resize(state.grid.size());
  out.b[0] = 0.0;
  for (std::size_t i = 1; i < out.b.size(); ++i) {
    const double x = state.label_x[i];
    out.b[i] = S * x * interp(beta, x, 1.0);
  }
  out.b.back() = state.B.back();
  return out;
}

CurvatureFields arclength_curvature(const ArclengthState& state, double xi_value, double eta_value) {
  const std::size_t M = state.cells();
  const double S = state.total_length();
  Kernel w;
  fill_kernel(state.B, S, state.n, eta_value, w);
  const int n = state.n;
  CurvatureFields f;
  f.n = n;
  f.xi = xi_value;
  f.s.resize(M + 1);
  for (std::size_t j = 0; j <= M; ++j) f.s[j] = S * static_cast<double>(j) / M;
  f.b_s = w.b_s;
  f.b_ss = w.b_ss;
  f.K.resize(M + 1);
  f.L.resize(M + 1);
  f.H.resize(M + 1);
  for (std::size_t j = 0; j <= M; ++j) {
    f.K[j] = -w.k[j];
    if (j == 0) {
      f.L[j] = f.K[j];
      f.H[j] = std::numeric_limits<double>::quiet_NaN();
    } else {
      f.L[j] = (1.0 - w.b_s[j] * w.b_s[j]) / (state.B[j] * state.B[j]);
      f.H[j] = (n - 1) * w.b_s[j] / state.B[j];
    }
  }
  const double shift = (n - 1) / xi_value;
  f.F1.resize(M + 1);
  f.F2.resize(M + 1);
  for (std::size_t j = 0; j <= M; ++j) {
    f.F1[j] = (n - 1) * f.K[j] + shift;
    f.F2[j] = f.K[j] + (n - 2) * f.L[j] + shift;
  }
  f.R_circ = shifted_scalar_curvature(f, xi_value, n);
  return f;
}

double volume(const ArclengthState& state) {
  const std::size_t M = state.cells();
  const double d = state.total_length() / static_cast<double>(M);
  const int power = state.n - 1;
  double sum = 0.5 * std::pow(state.B[M], power);
  for (std::size_t j = 1; j < M; ++j) sum += std::pow(state.B[j], power);
  return unit_sphere_area(state.n) * sum * d;
}

double arclength_at(const ArclengthState& state, double r) {
  const RadialGrid& g = state.grid;
  if (r < 0.0 || r > g.r0() * (1.0 + 1e-12)) throw Error(ErrorKind::Domain, "r outside [0, r0]");
  const double pos = std::min(r / g.dr(), static_cast<double>(g.last()));
  const std::size_t i = std::min(static_cast<std::size_t>(pos), g.last() - 1);
  const double w = pos - static_cast<double>(i);
  const double x = (1.0 - w) * state.label_x[i] + w * state.label_x[i + 1];
  return x * state.total_length();
}

ArclengthRates arclength_rhs(const ArclengthState& state, double eta_value) {
  state.validate();
  std::vector<double> y;
  pack(state, y);
  std::vector<double> dy(y.size());
  Kernel w;
  const std::size_t M = state.cells();
  const std::size_t L = state.grid.last();
  flat_rates(y, M, L, state.n, eta_value, w, dy);
  ArclengthRates out;
  out.dB.assign(dy.begin(), dy.begin() + static_cast<long>(M + 1));
  out.dlabel.assign(dy.begin() + static_cast<long>(M + 1), dy.begin() + static_cast<long>(M + L + 2));
  out.dalpha.assign(dy.begin() + static_cast<long>(M + L + 2), dy.end());
  return out;
}

double arclength_stable_dt(const ArclengthState& state, const SchemeConfig& scheme) {
  const double d = state.total_length() / static_cast<double>(state.cells());
  return std::min(scheme.dt_max, scheme.cfl_factor * d * d);
}

ArclengthStepper::ArclengthStepper(BackgroundModel model, RhoSpec rho, SchemeConfig scheme)
    : model_(model), rho_(std::move(rho)), scheme_(scheme) {
  model_.validate();
  scheme_.validate();
  if (scheme_.kind != SchemeKind::ExplicitRk4) {
    throw Error(ErrorKind::Config, "the arclength formulation runs with rk4 only");
  }
}

void ArclengthStepper::evaluate(const std::vector<double>& y, double t, std::vector<double>& dy) {
  Kernel w;
  flat_rates(y, cells_, labels_, model_.n, eta(t, model_, rho_), w, dy);
}

ArclengthState ArclengthStepper::step(const ArclengthState& state, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "time step must be positive");
  cells_ = state.cells();
  labels_ = state.grid.last();
  pack(state, y_);
  const std::size_t count = y_.size();
  for (auto& k : k_) k.resize(count);
  stage_.resize(count);
  const double t = state.t;

  evaluate(y_, t, k_[0]);
  for (std::size_t i = 0; i < count; ++i) stage_[i] = y_[i] + 0.5 * dt * k_[0][i];
  evaluate(stage_, t + 0.5 * dt, k_[1]);
  for (std::size_t i = 0; i < count; ++i) stage_[i] = y_[i] + 0.5 * dt * k_[1][i];
  evaluate(stage_, t + 0.5 * dt, k_[2]);
  for (std::size_t i = 0; i < count; ++i) stage_[i] = y_[i] + dt * k_[2][i];
  evaluate(stage_, t + dt, k_[3]);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < count; ++i) {
    y_[i] += w * (k_[0][i] + 2.0 * k_[1][i] + 2.0 * k_[2][i] + k_[3][i]);
  }

  ArclengthState out = state;
  unpack(y_, out);
  out.t = t + dt;
  try {
    out.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::StepRejected, std::string(e.what()) + " at t = " + std::to_string(out.t));
  }
  return out;
}

TimeSeriesRecord make_record(const ArclengthState& state, double dt, const BackgroundModel& model,
                             const RhoSpec& rho, double r_compact) {
  TimeSeriesRecord rec;
  rec.t = state.t;
  rec.dt = dt;
  rec.eta = eta(state.t, model, rho);
  const CurvatureFields f = arclength_curvature(state, xi(state.t, model), rec.eta);
  rec.volume = volume(state);
  rec.h_boundary = f.H.back();
  rec.min_f1 = *std::min_element(f.F1.begin(), f.F1.end());
  rec.max_f1 = *std::max_element(f.F1.begin(), f.F1.end());
  rec.min_f2 = *std::min_element(f.F2.begin(), f.F2.end());
  rec.max_f2 = *std::max_element(f.F2.begin(), f.F2.end());
  const double s_limit = arclength_at(state, r_compact * state.grid.r0()) * (1.0 + 1e-12);
  for (std::size_t j = 0; j < f.s.size() && f.s[j] <= s_limit; ++j) {
    rec.sup_f1_compact = std::max(rec.sup_f1_compact, std::abs(f.F1[j]));
  }
  return rec;
}

ArclengthTrajectory integrate_arclength(const ArclengthState& start, const BackgroundModel& model,
                                        const RhoSpec& rho, const SchemeConfig& scheme,
                                        const IntegrationSettings& settings) {
  start.validate();
  if (start.n != model.n || start.m != model.m || start.grid.r0() != model.r0) {
    throw Error(ErrorKind::Config, "state does not match the background model");
  }
  ArclengthTrajectory traj;
  ArclengthStepper stepper(model, rho, scheme);
  const auto result = detail::run_time_loop(
      start, settings, scheme.dt_min,
      [&](const ArclengthState& s, double dt) { return stepper.step(s, dt); },
      [&](const ArclengthState& s) { return arclength_stable_dt(s, scheme); },
      [&](const ArclengthState& s) { traj.snapshots.push_back(s); },
      [&](const ArclengthState& s, double dt) {
        traj.records.push_back(make_record(s, dt, model, rho, settings.r_compact));
      });
  traj.stats = result.stats;
  traj.aborted = result.aborted;
  traj.abort_reason = result.abort_reason;
  return traj;
}

}  // namespace rsflow
