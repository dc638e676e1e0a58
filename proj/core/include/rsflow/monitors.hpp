#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsflow/arclength.hpp"
#include "rsflow/background.hpp"
#include "rsflow/conformal.hpp"
#include "rsflow/flow_solver.hpp"
#include "rsflow/geometry.hpp"
#include "rsflow/metric_state.hpp"
#include "rsflow/rho.hpp"
#include "rsflow/validator.hpp"

namespace rsflow {

// One snapshot as the checks see it, whichever formulation produced it.
// fields and node_b live on the solver's own nodes (the r-grid, or the s-grid
// of the arclength formulation); metric and s_ref are sampled on the
// reference r-grid.
struct MonitorFrame {
  double t = 0.0;
  double xi = 1.0;
  double eta = 0.0;
  double spacing = 0.0;  // dr or ds of the solver nodes
  double dt = 0.0;       // explicit step bound at this state
  int order = 4;         // temporal order of the scheme
  CurvatureFields fields;
  std::vector<double> node_b;
  std::vector<double> node_r;  // reference radius of each solver node
  RadialMetricState metric;
  std::vector<double> s_ref;   // s(r_i, t)
  std::optional<double> u_min;

  // C (spacing^2 + dt^order); the common shape of every default tolerance.
  double consistency(double c) const;
};

MonitorFrame make_frame(const RadialMetricState& state, const BackgroundModel& model,
                        const RhoSpec& rho, const SchemeConfig& scheme);
MonitorFrame make_frame(const ArclengthState& state, const BackgroundModel& model,
                        const RhoSpec& rho, const SchemeConfig& scheme);
MonitorFrame make_frame(const ConformalState& state, const RhoSpec& rho, const SchemeConfig& scheme);

// For states that need not satisfy the boundary condition (synthetic probes):
// one-sided stencils at r0, eta left as NaN, dt = 0.
MonitorFrame make_frame(const RadialMetricState& state, double xi_value);

struct CheckResult {
  std::string id;
  Verdict verdict = Verdict::Pass;
  double worst_margin = 0.0;  // negative = violation magnitude
  double worst_r = 0.0;
  double worst_t = 0.0;
  double tolerance = 0.0;
  bool flagged = false;       // plateau or strictness flag, see note
  std::string note;
};

struct MonitorReport {
  std::vector<CheckResult> checks;

  Verdict overall() const;  // Fail beats Indeterminate beats Pass
  const CheckResult* find(std::string_view id) const;
  std::string to_text() const;
};

struct MonitorConfig {
  std::vector<std::string> enabled;  // empty: every check that applies to n
  double t_warmup = 0.05;
  double ordering_c = 10.0;
  double scaling_c = 10.0;
  double barrier_c = 10.0;
  double s_bound_c = 10.0;
  double radial_c = 50.0;
  double boundary_c = 50.0;
  double convexity_c = 10.0;
  double conformal_c = 10.0;
  double identity_rel = 1e-12;
  double s_bound_fraction = 0.95;
  double r_compact = 0.5;          // fraction of r0
  double window = 5.0;             // final window for the trend checks
  double convergence_threshold = 1e-2;
  double k_fit_tolerance = 2e-2;
  double plateau_rel = 1e-6;       // relative Vol growth below which the plateau flag is set
};

// Check ids, in report order.
const std::vector<std::string>& all_check_ids();
std::vector<std::string> default_checks(int n);

CheckResult check_ordering(const std::vector<MonitorFrame>& frames, int n, const MonitorConfig& config);
CheckResult check_monotone_scaling(const std::vector<MonitorFrame>& frames, const BackgroundModel& model,
                                   const MonitorConfig& config);
CheckResult check_lower_barriers(const std::vector<MonitorFrame>& frames, const MonitorConfig& config);
CheckResult check_s_upper_bound(const std::vector<MonitorFrame>& frames, const MonitorConfig& config);
CheckResult check_algebraic_identity(const std::vector<MonitorFrame>& frames, const MonitorConfig& config);

// Residual of d/ds (F1 - (n-1) F2) = -2 (F1 - F2) H, divided by H, at interior
// nodes and at r0. Undivided, H ~ (n-1)/s turns O(dr^2) errors into O(dr)
// at the first few nodes. The derivative at r0 is extrapolated from nodes
// L-3..L-1.
double radial_identity_residual(const MonitorFrame& frame, double* where = nullptr);
CheckResult check_radial_identity(const std::vector<MonitorFrame>& frames, int n,
                                  const MonitorConfig& config);

// eta' = eta (F1 + (n-1)(1 - 1/xi)) - (n-1) dF2/dn at r0.
double boundary_eta_residual(const MonitorFrame& frame, const BackgroundModel& model,
                             const RhoSpec& rho);
CheckResult check_boundary_eta_identity(const std::vector<MonitorFrame>& frames,
                                        const BackgroundModel& model, const RhoSpec& rho,
                                        const MonitorConfig& config);

// Uses the time series for the trend (sup |F1| on r <= r_compact r0) and the
// final frame for max(|F1|, |F2|) and the fitted K on the same region.
CheckResult check_convergence(const std::vector<TimeSeriesRecord>& records,
                              const std::vector<MonitorFrame>& frames, const MonitorConfig& config);
CheckResult check_volume_growth(const std::vector<TimeSeriesRecord>& records,
                                const MonitorConfig& config);
CheckResult check_convexity(const std::vector<MonitorFrame>& frames, const MonitorConfig& config);

// Two-dimensional bounds: F1 <= tol and u >= min(0, -ln m).
CheckResult check_conformal_bounds(const std::vector<MonitorFrame>& frames, double m,
                                   const MonitorConfig& config);

MonitorReport run_monitors(const std::vector<MonitorFrame>& frames,
                           const std::vector<TimeSeriesRecord>& records,
                           const BackgroundModel& model, const RhoSpec& rho,
                           const MonitorConfig& config);

}  // namespace rsflow
