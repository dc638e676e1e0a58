#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rsflow/background.hpp"
#include "rsflow/metric_state.hpp"
#include "rsflow/rho.hpp"

namespace rsflow {

enum class SchemeKind { ExplicitRk4, ImexCn };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme(std::string_view name);

struct SchemeConfig {
  SchemeKind kind = SchemeKind::ExplicitRk4;
  double cfl_factor = 0.2;  // explicit dt <= cfl_factor * min(a dr)^2
  double dt_max = 1e-2;
  double dt_min = 1e-10;    // abort threshold after repeated halving
  double newton_tol = 1e-10;
  int newton_max_iter = 25;

  void validate() const;
};

// Time derivatives of (a, b) under the normalized flow:
//   a_t = (n-1) a (b_ss / b - 1)
//   b_t = b_ss - (n-2)(1 - b_s^2)/b - (n-1) b
struct MetricRates {
  std::vector<double> da_dt;
  std::vector<double> db_dt;
};

// Robin data at r0 from H = eta, i.e. b_s = eta b / (n-1).
struct BoundaryStencil {
  double slope;   // b_r at r0
  double b_rr;    // second-order one-sided b_rr using the slope
  double ghost;   // value at r0 + dr reproducing b_rr with the centered stencil
};

BoundaryStencil apply_boundary(const RadialMetricState& state, double eta_value);

MetricRates rhs(const RadialMetricState& state, double eta_value);
MetricRates rhs(const RadialMetricState& state, double t, const BackgroundModel& model,
                const RhoSpec& rho);

// Largest explicit step allowed by the scheme for this state.
double stable_dt(const RadialMetricState& state, const SchemeConfig& scheme);

// Owns scratch buffers so repeated steps do not allocate.
class FlowStepper {
 public:
  FlowStepper(BackgroundModel model, RhoSpec rho, SchemeConfig scheme);

  // Advances state by dt. Throws Error(StepRejected) if a or b lose
  // positivity and Error(NewtonDivergence) if the implicit solve fails.
  RadialMetricState step(const RadialMetricState& state, double dt);

  double eta_at(double t) const { return eta(t, model_, rho_); }
  const BackgroundModel& model() const noexcept { return model_; }
  const RhoSpec& rho() const noexcept { return rho_; }
  const SchemeConfig& scheme() const noexcept { return scheme_; }

 private:
  void evaluate(const std::vector<double>& a, const std::vector<double>& b, double t,
                std::vector<double>& da, std::vector<double>& db);
  void rk4(const RadialMetricState& in, double dt, RadialMetricState& out);
  void imex_cn(const RadialMetricState& in, double dt, RadialMetricState& out);

  BackgroundModel model_;
  RhoSpec rho_;
  SchemeConfig scheme_;
  RadialGrid grid_;
  std::vector<double> inv_r_, beta_;
  std::vector<double> ka_[4], kb_[4], stage_a_, stage_b_;
};

RadialMetricState step(const RadialMetricState& state, double dt, const SchemeConfig& scheme,
                       const BackgroundModel& model, const RhoSpec& rho);

struct TimeSeriesRecord {
  double t = 0.0;
  double dt = 0.0;
  double volume = 0.0;
  double eta = 0.0;
  double h_boundary = 0.0;
  double min_f1 = 0.0;
  double max_f1 = 0.0;
  double min_f2 = 0.0;
  double max_f2 = 0.0;
  double sup_f1_compact = 0.0;
  double u_min = 0.0;  // two-dimensional runs only
};

struct StepStatistics {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
};

struct Trajectory {
  std::vector<RadialMetricState> snapshots;
  std::vector<TimeSeriesRecord> records;
  StepStatistics stats;
  bool aborted = false;
  std::string abort_reason;
};

struct IntegrationSettings {
  double t_end = 1.0;
  std::vector<double> snapshot_times;  // sorted; t_end is always added
  double series_interval = 0.01;       // one record per crossing of k * interval
  double r_compact = 0.5;              // fraction of r0 for sup |F1| in the records
};

// Snapshot times k * interval for k = 0, 1, ... up to t_end.
std::vector<double> cadence(double interval, double t_end);

TimeSeriesRecord make_record(const RadialMetricState& state, double dt, const BackgroundModel& model,
                             const RhoSpec& rho, double r_compact);

// Integrates from start (t = start.t) to settings.t_end. Snapshots at times
// <= start.t are skipped; the start state itself is recorded only when
// start.t == 0. Dt collapse ends the run with aborted = true and the last
// accepted state as final snapshot.
Trajectory integrate(const RadialMetricState& start, const BackgroundModel& model,
                     const RhoSpec& rho, const SchemeConfig& scheme,
                     const IntegrationSettings& settings);

}  // namespace rsflow
