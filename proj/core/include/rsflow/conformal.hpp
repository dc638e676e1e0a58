#pragma once

#include <vector>

#include "rsflow/background.hpp"
#include "rsflow/flow_solver.hpp"
#include "rsflow/grid.hpp"
#include "rsflow/metric_state.hpp"
#include "rsflow/rho.hpp"

namespace rsflow {

// Two-dimensional flow written as g(t) = e^{2u} g(0) with g(0) = m g_{-1}:
//   u_t = e^{-2u} (Lap_{g(0)} u + 1/m) - 1,
//   (1/sqrt(m)) u_r + m^{-1/2} coth(r0) = eta e^u at r0,
//   u = 0 at t = 0.
struct ConformalState {
  double t = 0.0;
  std::vector<double> u;
  RadialGrid grid;
  BackgroundModel model;  // n == 2

  void validate() const;
};

ConformalState initial_conformal_state(const RadialGrid& grid, const BackgroundModel& model);

// The (a, b) image: a = sqrt(m) e^u, b = sqrt(m) sinh(r) e^u.
RadialMetricState to_metric_state(const ConformalState& state);

// Ghost datum at r0 from the Robin condition.
struct ConformalBoundary {
  double slope;  // u_r at r0
  double u_rr;   // second-order one-sided u_rr using the slope
  double ghost;
};

ConformalBoundary conformal_boundary(const ConformalState& state, double eta_value);

std::vector<double> conformal_rhs(const ConformalState& state, double eta_value);

double conformal_stable_dt(const ConformalState& state, const SchemeConfig& scheme);

class ConformalStepper {
 public:
  ConformalStepper(BackgroundModel model, RhoSpec rho, SchemeConfig scheme);

  ConformalState step(const ConformalState& state, double dt);

 private:
  void evaluate(const std::vector<double>& u, double t, std::vector<double>& du);

  BackgroundModel model_;
  RhoSpec rho_;
  SchemeConfig scheme_;
  RadialGrid grid_;
  std::vector<double> coth_r_;
  std::vector<double> k_[4], stage_;
};

struct ConformalTrajectory {
  std::vector<ConformalState> snapshots;
  std::vector<TimeSeriesRecord> records;
  StepStatistics stats;
  bool aborted = false;
  std::string abort_reason;
};

ConformalTrajectory integrate_conformal(const ConformalState& start, const RhoSpec& rho,
                                        const SchemeConfig& scheme,
                                        const IntegrationSettings& settings);

struct DiscrepancyReport {
  double max_rel_a = 0.0;
  double max_rel_b = 0.0;
  double worst_t = 0.0;
  double worst_r = 0.0;
  std::size_t snapshots_compared = 0;

  double max() const { return max_rel_a > max_rel_b ? max_rel_a : max_rel_b; }
};

// Compares the (a, b) trajectory with the image of the conformal one at every
// snapshot. Throws Error(Config) if grids, models or snapshot times differ.
DiscrepancyReport cross_check(const Trajectory& ab, const ConformalTrajectory& conformal);

}  // namespace rsflow
