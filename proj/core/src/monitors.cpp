#include "rsflow/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rsflow/error.hpp"

namespace rsflow {

double MonitorFrame::consistency(double c) const {
  return c * (spacing * spacing + std::pow(dt, order));
}

namespace {

int scheme_order(const SchemeConfig& scheme) { return scheme.kind == SchemeKind::ExplicitRk4 ? 4 : 2; }

MonitorFrame frame_from_metric(const RadialMetricState& state, double xi_value,
                               std::optional<double> eta_value) {
  MonitorFrame f;
  f.t = state.t;
  f.xi = xi_value;
  f.eta = eta_value.value_or(std::numeric_limits<double>::quiet_NaN());
  f.spacing = state.grid.dr();
  f.fields = curvature(state, xi_value, eta_value);
  f.node_b = state.b;
  f.node_r = state.grid.r();
  f.metric = state;
  f.s_ref = arclength(state);
  return f;
}

// Three-point centered derivative on a nonuniform grid.
double centered_derivative(const std::vector<double>& s, const std::vector<double>& g, std::size_t i) {
  const double h1 = s[i] - s[i - 1];
  const double h2 = s[i + 1] - s[i];
  return (-h2 / (h1 * (h1 + h2))) * g[i - 1] + ((h2 - h1) / (h1 * h2)) * g[i] +
         (h1 / (h2 * (h1 + h2))) * g[i + 1];
}

// Derivative at the last node from the quadratic through nodes L-3..L-1. The
// last node's curvature comes from a one-sided closure whose O(h^2) error has
// a different constant than the interior one, so any difference that uses it
// is only first order.
double end_derivative(const std::vector<double>& s, const std::vector<double>& g) {
  const std::size_t L = s.size() - 1;
  const double x = s[L];
  const double x0 = s[L - 3], x1 = s[L - 2], x2 = s[L - 1];
  return g[L - 3] * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)) +
         g[L - 2] * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)) +
         g[L - 1] * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
}

CheckResult start(std::string id) {
  CheckResult c;
  c.id = std::move(id);
  c.worst_margin = std::numeric_limits<double>::infinity();
  return c;
}

// Keeps the smallest tolerance-adjusted margin and where it happened.
void observe(CheckResult& c, double margin, double r, double t, double tol) {
  if (margin < c.worst_margin) {
    c.worst_margin = margin;
    c.worst_r = r;
    c.worst_t = t;
    c.tolerance = tol;
  }
}

void settle(CheckResult& c) {
  if (!std::isfinite(c.worst_margin)) {
    c.worst_margin = 0.0;
    if (c.note.empty()) c.note = "no eligible nodes";
    if (c.verdict == Verdict::Pass) c.verdict = Verdict::Indeterminate;
    return;
  }
  if (c.worst_margin < 0.0) c.verdict = Verdict::Fail;
}

void require_frames(const std::vector<MonitorFrame>& frames, std::size_t count, const char* what) {
  if (frames.size() < count) throw Error(ErrorKind::Config, std::string(what) + " needs more snapshots");
}

double max_abs(const std::vector<double>& v) {
  double out = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) out = std::max(out, std::abs(x));
  }
  return out;
}

}  // namespace

MonitorFrame make_frame(const RadialMetricState& state, const BackgroundModel& model,
                        const RhoSpec& rho, const SchemeConfig& scheme) {
  MonitorFrame f = frame_from_metric(state, xi(state.t, model), eta(state.t, model, rho));
  f.dt = stable_dt(state, scheme);
  f.order = scheme_order(scheme);
  return f;
}

MonitorFrame make_frame(const RadialMetricState& state, double xi_value) {
  return frame_from_metric(state, xi_value, std::nullopt);
}

MonitorFrame make_frame(const ArclengthState& state, const BackgroundModel& model,
                        const RhoSpec& rho, const SchemeConfig& scheme) {
  MonitorFrame f;
  f.t = state.t;
  f.xi = xi(state.t, model);
  f.eta = eta(state.t, model, rho);
  const double S = state.total_length();
  const std::size_t M = state.cells();
  f.spacing = S / static_cast<double>(M);
  f.dt = arclength_stable_dt(state, scheme);
  f.order = scheme_order(scheme);
  f.fields = arclength_curvature(state, f.xi, f.eta);
  f.node_b = state.B;
  f.metric = to_metric_state(state);
  f.s_ref.resize(state.label_x.size());
  for (std::size_t i = 0; i < f.s_ref.size(); ++i) f.s_ref[i] = state.label_x[i] * S;

  // Reference radius of each s-node by inverting the labels linearly.
  const auto& lx = state.label_x;
  const auto& r = state.grid.r();
  f.node_r.resize(M + 1);
  std::size_t i = 0;
  for (std::size_t j = 0; j <= M; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(M);
    while (i + 2 < lx.size() && lx[i + 1] < x) ++i;
    const double w = std::clamp((x - lx[i]) / (lx[i + 1] - lx[i]), 0.0, 1.0);
    f.node_r[j] = (1.0 - w) * r[i] + w * r[i + 1];
  }
  return f;
}

MonitorFrame make_frame(const ConformalState& state, const RhoSpec& rho, const SchemeConfig& scheme) {
  const RadialMetricState metric = to_metric_state(state);
  MonitorFrame f = frame_from_metric(metric, xi(state.t, state.model), eta(state.t, state.model, rho));
  f.dt = conformal_stable_dt(state, scheme);
  f.order = scheme_order(scheme);
  f.u_min = *std::min_element(state.u.begin(), state.u.end());
  return f;
}

Verdict MonitorReport::overall() const {
  Verdict out = Verdict::Pass;
  for (const auto& c : checks) {
    if (c.verdict == Verdict::Fail) return Verdict::Fail;
    if (c.verdict == Verdict::Indeterminate) out = Verdict::Indeterminate;
  }
  return out;
}

const CheckResult* MonitorReport::find(std::string_view id) const {
  for (const auto& c : checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::string MonitorReport::to_text() const {
  std::string out;
  char line[768];
  std::snprintf(line, sizeof line, "monitor-report checks=%zu overall=%s\n", checks.size(),
                std::string(to_string(overall())).c_str());
  out += line;
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line,
                  "check %s verdict=%s margin=%.9e r=%.9g t=%.9g tolerance=%.9e flagged=%d%s%s\n",
                  c.id.c_str(), std::string(to_string(c.verdict)).c_str(), c.worst_margin, c.worst_r,
                  c.worst_t, c.tolerance, c.flagged ? 1 : 0, c.note.empty() ? "" : "  # ",
                  c.note.c_str());
    out += line;
  }
  return out;
}

const std::vector<std::string>& all_check_ids() {
  static const std::vector<std::string> ids = {
      "ordering",          "monotone_scaling",      "lower_barriers", "s_upper_bound",
      "algebraic_identity", "radial_identity",      "boundary_eta_identity",
      "convergence",       "volume_growth",         "convexity",      "conformal_bounds"};
  return ids;
}

std::vector<std::string> default_checks(int n) {
  if (n == 2) {
    return {"monotone_scaling", "lower_barriers", "algebraic_identity", "boundary_eta_identity",
            "convergence",      "volume_growth",  "convexity",          "conformal_bounds"};
  }
  return {"ordering",      "monotone_scaling", "lower_barriers", "s_upper_bound",
          "algebraic_identity", "radial_identity", "boundary_eta_identity", "convergence",
          "volume_growth", "convexity"};
}

CheckResult check_ordering(const std::vector<MonitorFrame>& frames, int n, const MonitorConfig& config) {
  if (n < 3) throw Error(ErrorKind::Config, "the curvature ordering is not applicable for n = 2");
  CheckResult c = start("ordering");
  double tightest_strict = std::numeric_limits<double>::infinity();
  for (const auto& f : frames) {
    if (f.t <= config.t_warmup) continue;
    const auto& F1 = f.fields.F1;
    const auto& F2 = f.fields.F2;
    const double scale = (n - 1) / f.xi + std::max(max_abs(F1), max_abs(F2));
    const double tol = f.consistency(config.ordering_c) * scale;
    for (std::size_t i = 0; i < F1.size(); ++i) {
      const double m1 = F1[i] - (n - 1) * F2[i];
      const double m2 = F2[i] - F1[i];
      const double m3 = -F2[i];
      observe(c, std::min({m1, m2, m3}) + tol, f.node_r[i], f.t, tol);
      if (i > 0) tightest_strict = std::min(tightest_strict, m2 - tol);
    }
  }
  settle(c);
  if (c.verdict == Verdict::Pass && tightest_strict <= 0.0) {
    c.verdict = Verdict::Indeterminate;
    c.flagged = true;
    c.note = "F1 < F2 not certified: within tolerance of equality";
  }
  return c;
}

CheckResult check_monotone_scaling(const std::vector<MonitorFrame>& frames, const BackgroundModel& model,
                                   const MonitorConfig& config) {
  require_frames(frames, 2, "monotone_scaling");
  CheckResult c = start("monotone_scaling");
  const double root_m = std::sqrt(model.m);
  const auto& r = frames.front().metric.grid.r();
  std::vector<double> qa_prev, qb_prev;
  double increase = 0.0;
  for (const auto& f : frames) {
    const double w = std::sqrt(model.m / f.xi);
    const double tol = f.consistency(config.scaling_c);
    std::vector<double> qa(r.size()), qb(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      qa[i] = w * f.metric.a[i];
      qb[i] = w * f.metric.b[i];
      // Lower bound by the initial data.
      observe(c, qa[i] / root_m - 1.0 + tol, r[i], f.t, tol);
      if (i > 0) observe(c, qb[i] / (root_m * std::sinh(r[i])) - 1.0 + tol, r[i], f.t, tol);
      if (!qa_prev.empty()) {
        observe(c, qa[i] / qa_prev[i] - 1.0 + tol, r[i], f.t, tol);
        increase = std::max(increase, qa[i] / qa_prev[i] - 1.0);
        if (i > 0) observe(c, qb[i] / qb_prev[i] - 1.0 + tol, r[i], f.t, tol);
      }
    }
    qa_prev = std::move(qa);
    qb_prev = std::move(qb);
  }
  settle(c);
  char note[96];
  std::snprintf(note, sizeof note, "largest relative increase of the scaled a: %.3e", increase);
  c.note = note;
  return c;
}

CheckResult check_lower_barriers(const std::vector<MonitorFrame>& frames, const MonitorConfig& config) {
  CheckResult c = start("lower_barriers");
  for (const auto& f : frames) {
    const double root_xi = std::sqrt(f.xi);
    const double tol = f.consistency(config.barrier_c);
    const auto& s = f.fields.s;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double y = s[j] / root_xi;
      const double cosh_y = std::cosh(y);
      observe(c, f.fields.b_s[j] / cosh_y - 1.0 + tol, f.node_r[j], f.t, tol);
      if (j > 0) observe(c, f.node_b[j] / (root_xi * std::sinh(y)) - 1.0 + tol, f.node_r[j], f.t, tol);
    }
  }
  settle(c);
  return c;
}

CheckResult check_s_upper_bound(const std::vector<MonitorFrame>& frames, const MonitorConfig& config) {
  CheckResult c = start("s_upper_bound");
  for (const auto& f : frames) {
    const auto& r = f.metric.grid.r();
    const double r0 = f.metric.grid.r0();
    const double tol = f.consistency(config.s_bound_c);
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (r[i] > config.s_bound_fraction * r0 * (1.0 + 1e-12)) break;
      const double bound = std::sqrt(f.xi) * std::log((std::exp(r0 + r[i]) - 1.0) / (std::exp(r0) - std::exp(r[i])));
      observe(c, 1.0 - f.s_ref[i] / bound + tol, r[i], f.t, tol);
    }
  }
  settle(c);
  return c;
}

CheckResult check_algebraic_identity(const std::vector<MonitorFrame>& frames, const MonitorConfig& config) {
  CheckResult c = start("algebraic_identity");
  for (const auto& f : frames) {
    const int n = f.fields.n;
    const auto& F1 = f.fields.F1;
    const auto& F2 = f.fields.F2;
    const auto& L = f.fields.L;
    for (std::size_t i = 0; i < F1.size(); ++i) {
      const double lhs = F1[i] - (n - 1) * F2[i];
      const double rhs = -(n - 1) * (n - 2) * (L[i] + 1.0 / f.xi);
      const double scale = std::max({std::abs(F1[i]), (n - 1) * std::abs(F2[i]),
                                     (n - 1) * std::abs(f.fields.K[i]),
                                     (n - 1) * (n - 2) * std::abs(L[i]), (n - 1) / f.xi});
      observe(c, config.identity_rel - std::abs(lhs - rhs) / scale, f.node_r[i], f.t,
              config.identity_rel);
    }
  }
  settle(c);
  return c;
}

double radial_identity_residual(const MonitorFrame& frame, double* where) {
  const auto& fl = frame.fields;
  const int n = fl.n;
  const std::size_t count = fl.s.size();
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = fl.F1[i] - (n - 1) * fl.F2[i];
  double worst = 0.0;
  auto note = [&](double res, std::size_t i) {
    if (res > worst) {
      worst = res;
      if (where) *where = frame.node_r[i];
    }
  };
  for (std::size_t i = 1; i + 2 < count; ++i) {
    const double lhs = centered_derivative(fl.s, g, i);
    note(std::abs(lhs / fl.H[i] + 2.0 * (fl.F1[i] - fl.F2[i])), i);
  }
  const std::size_t last = count - 1;
  note(std::abs(end_derivative(fl.s, g) / fl.H[last] + 2.0 * (fl.F1[last] - fl.F2[last])), last);
  return worst;
}

CheckResult check_radial_identity(const std::vector<MonitorFrame>& frames, int n,
                                  const MonitorConfig& config) {
  if (n < 3) throw Error(ErrorKind::Config, "the radial identity is trivial for n = 2");
  CheckResult c = start("radial_identity");
  for (const auto& f : frames) {
    double where = 0.0;
    const double res = radial_identity_residual(f, &where);
    const double scale = 1.0 + std::max(max_abs(f.fields.F1), max_abs(f.fields.F2));
    const double tol = f.consistency(config.radial_c) * scale;
    observe(c, tol - res, where, f.t, tol);
  }
  settle(c);
  return c;
}

double boundary_eta_residual(const MonitorFrame& frame, const BackgroundModel& model,
                             const RhoSpec& rho) {
  const auto& fl = frame.fields;
  const int n = fl.n;
  const std::size_t last = fl.s.size() - 1;
  const double dF2_dn = end_derivative(fl.s, fl.F2);
  const double rhs = frame.eta * (fl.F1[last] + (n - 1) * (1.0 - 1.0 / frame.xi)) - (n - 1) * dF2_dn;
  return eta_derivative(frame.t, model, rho) - rhs;
}

CheckResult check_boundary_eta_identity(const std::vector<MonitorFrame>& frames,
                                        const BackgroundModel& model, const RhoSpec& rho,
                                        const MonitorConfig& config) {
  CheckResult c = start("boundary_eta_identity");
  for (const auto& f : frames) {
    const auto& fl = f.fields;
    const std::size_t last = fl.s.size() - 1;
    const double res = std::abs(boundary_eta_residual(f, model, rho));
    const double scale = 1.0 + std::abs(f.eta) * (std::abs(fl.F1[last]) + (fl.n - 1) / f.xi) +
                         (fl.n - 1) * std::abs(end_derivative(fl.s, fl.F2));
    const double tol = f.consistency(config.boundary_c) * scale;
    observe(c, tol - res, f.node_r[last], f.t, tol);
  }
  settle(c);
  return c;
}

CheckResult check_convergence(const std::vector<TimeSeriesRecord>& records,
                              const std::vector<MonitorFrame>& frames, const MonitorConfig& config) {
  if (records.empty() || frames.empty()) throw Error(ErrorKind::Config, "convergence needs a trajectory");
  const double t_end = records.back().t;
  if (t_end < 2.0 * config.window) {
    throw Error(ErrorKind::Config, "trajectory too short for the convergence window");
  }
  CheckResult c = start("convergence");
  c.tolerance = config.convergence_threshold;
  const double t_from = t_end - config.window;

  // Trend of sup |F1| on the compact region over the final window.
  double worst_rise = 0.0, rise_t = 0.0;
  bool bounded = true;
  const TimeSeriesRecord* prev = nullptr;
  for (const auto& rec : records) {
    if (!std::isfinite(rec.sup_f1_compact)) bounded = false;
    if (rec.t < t_from - 1e-12) continue;
    if (prev && rec.sup_f1_compact - prev->sup_f1_compact > worst_rise) {
      worst_rise = rec.sup_f1_compact - prev->sup_f1_compact;
      rise_t = rec.t;
    }
    prev = &rec;
  }

  const MonitorFrame& f = frames.back();
  const double r_limit = config.r_compact * f.metric.grid.r0() * (1.0 + 1e-12);
  double c_end = 0.0, k_sum = 0.0, c_r = 0.0;
  std::size_t k_count = 0;
  for (std::size_t i = 0; i < f.node_r.size() && f.node_r[i] <= r_limit; ++i) {
    const double v = std::max(std::abs(f.fields.F1[i]), std::abs(f.fields.F2[i]));
    if (v > c_end) {
      c_end = v;
      c_r = f.node_r[i];
    }
    k_sum += f.fields.K[i];
    ++k_count;
  }
  const double k_fit = k_sum / static_cast<double>(std::max<std::size_t>(k_count, 1));
  const double k_dev = std::abs(k_fit + 1.0);

  observe(c, config.convergence_threshold - c_end, c_r, f.t, config.convergence_threshold);
  observe(c, config.k_fit_tolerance - k_dev, 0.0, f.t, config.k_fit_tolerance);
  if (worst_rise > 0.0) observe(c, -worst_rise, 0.0, rise_t, 0.0);
  settle(c);
  if (!bounded) c.verdict = Verdict::Fail;
  char note[256];
  std::snprintf(note, sizeof note,
                "c(t_end)=%.6e sup|F1|(t_end)=%.6e K_fit=%.9f over %zu nodes; largest rise of "
                "sup|F1| on [%.4g, %.4g]: %.3e%s",
                c_end, records.back().sup_f1_compact, k_fit, k_count, t_from, t_end, worst_rise,
                bounded ? "" : "; unbounded");
  c.note = note;
  return c;
}

CheckResult check_volume_growth(const std::vector<TimeSeriesRecord>& records,
                                const MonitorConfig& config) {
  if (records.size() < 3) throw Error(ErrorKind::Config, "volume_growth needs a time series");
  const double t_end = records.back().t;
  if (t_end < 3.0) throw Error(ErrorKind::Config, "volume_growth needs t_end >= 3");
  CheckResult c = start("volume_growth");
  const double t_from = t_end - std::min(config.window, 0.5 * t_end);

  // Decreases at round-off level are tolerated and only count against strictness.
  const double noise = 1e-12;
  const TimeSeriesRecord* first = nullptr;
  const TimeSeriesRecord* prev = nullptr;
  bool strict = true;
  for (const auto& rec : records) {
    if (rec.t < t_from - 1e-12) continue;
    if (!first) first = &rec;
    if (prev) {
      const double rel = rec.volume / prev->volume - 1.0;
      if (!(rel > 0.0)) strict = false;
      observe(c, rel + noise, 0.0, rec.t, noise);
    }
    prev = &rec;
  }
  // Growth rate of ln Vol over [t_end/2, t_end].
  double st = 0, sv = 0, stt = 0, stv = 0;
  int count = 0;
  for (const auto& rec : records) {
    if (rec.t < 0.5 * t_end) continue;
    const double v = std::log(rec.volume);
    st += rec.t;
    sv += v;
    stt += rec.t * rec.t;
    stv += rec.t * v;
    ++count;
  }
  const double rate = (count * stv - st * sv) / (count * stt - st * st);
  const double growth = records.back().volume / first->volume - 1.0;
  settle(c);
  c.flagged = growth < config.plateau_rel;
  if (c.verdict == Verdict::Pass && (c.flagged || !strict)) c.verdict = Verdict::Indeterminate;
  char note[200];
  std::snprintf(note, sizeof note, "Vol(t_end)=%.9e relative growth on [%.4g, %.4g]=%.3e rate=%.6f%s%s",
                records.back().volume, t_from, t_end, growth, rate, c.flagged ? "; plateau" : "",
                strict ? "" : "; not strictly increasing");
  c.note = note;
  return c;
}

CheckResult check_convexity(const std::vector<MonitorFrame>& frames, const MonitorConfig& config) {
  CheckResult c = start("convexity");
  for (const auto& f : frames) {
    if (!(f.eta > 0.0)) continue;
    const double tol = f.consistency(config.convexity_c);
    const auto& b_s = f.fields.b_s;
    for (std::size_t j = 1; j + 1 < b_s.size(); ++j) observe(c, b_s[j] + tol, f.node_r[j], f.t, tol);
  }
  settle(c);
  return c;
}

CheckResult check_conformal_bounds(const std::vector<MonitorFrame>& frames, double m,
                                   const MonitorConfig& config) {
  CheckResult c = start("conformal_bounds");
  const double u_floor = std::min(0.0, -std::log(m));
  for (const auto& f : frames) {
    const double scale = 1.0 / f.xi + max_abs(f.fields.F1);
    const double tol = f.consistency(config.conformal_c) * scale;
    for (std::size_t i = 0; i < f.fields.F1.size(); ++i) {
      observe(c, tol - f.fields.F1[i], f.node_r[i], f.t, tol);
    }
    double u_min = 0.0;
    if (f.u_min) {
      u_min = *f.u_min;
    } else {
      u_min = std::numeric_limits<double>::infinity();
      for (double a : f.metric.a) u_min = std::min(u_min, std::log(a / std::sqrt(m)));
    }
    observe(c, u_min - u_floor + 1e-6, 0.0, f.t, 1e-6);
  }
  settle(c);
  return c;
}

MonitorReport run_monitors(const std::vector<MonitorFrame>& frames,
                           const std::vector<TimeSeriesRecord>& records,
                           const BackgroundModel& model, const RhoSpec& rho,
                           const MonitorConfig& config) {
  if (frames.empty()) throw Error(ErrorKind::Config, "no snapshots to monitor");
  const bool implicit = config.enabled.empty();
  std::vector<std::string> ids = implicit ? default_checks(model.n) : config.enabled;
  const double t_end = records.empty() ? frames.back().t : records.back().t;
  for (const auto& id : ids) {
    if (std::find(all_check_ids().begin(), all_check_ids().end(), id) == all_check_ids().end()) {
      throw Error(ErrorKind::Config, "unknown check: " + id);
    }
  }
  MonitorReport report;
  for (const auto& known : all_check_ids()) {
    if (std::find(ids.begin(), ids.end(), known) == ids.end()) continue;
    // Trend checks are skipped silently when the defaults are in use and the
    // run is too short for them.
    if (implicit && known == "convergence" && t_end < 2.0 * config.window) continue;
    if (implicit && known == "volume_growth" && t_end < 3.0) continue;
    if (implicit && known == "monotone_scaling" && frames.size() < 2) continue;
    if (known == "ordering") report.checks.push_back(check_ordering(frames, model.n, config));
    if (known == "monotone_scaling") report.checks.push_back(check_monotone_scaling(frames, model, config));
    if (known == "lower_barriers") report.checks.push_back(check_lower_barriers(frames, config));
    if (known == "s_upper_bound") report.checks.push_back(check_s_upper_bound(frames, config));
    if (known == "algebraic_identity") report.checks.push_back(check_algebraic_identity(frames, config));
    if (known == "radial_identity") report.checks.push_back(check_radial_identity(frames, model.n, config));
    if (known == "boundary_eta_identity") {
      report.checks.push_back(check_boundary_eta_identity(frames, model, rho, config));
    }
    if (known == "convergence") report.checks.push_back(check_convergence(records, frames, config));
    if (known == "volume_growth") report.checks.push_back(check_volume_growth(records, config));
    if (known == "convexity") report.checks.push_back(check_convexity(frames, config));
    if (known == "conformal_bounds") report.checks.push_back(check_conformal_bounds(frames, model.m, config));
  }
  return report;
}

}  // namespace rsflow
