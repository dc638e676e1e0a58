#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rsflow/background.hpp"
#include "rsflow/flow_solver.hpp"
#include "rsflow/geometry.hpp"
#include "rsflow/metric_state.hpp"
#include "rsflow/rho.hpp"

namespace rsflow {

// The same flow written in the evolving arclength s. B(s, t) = b lives on
// s_j = S(t) j / M where S(t) is the length of the radius. Once rho is
// switched on, a(r0) grows without bound and a fixed r-grid runs out of
// resolution in a layer near r0; in s the solution stays smooth.
//
// S is not evolved separately. It is read off as the pole slope of B in the
// unit coordinate x = s/S, which keeps b_s(0) = 1 exactly. A free S admits a
// cone at the pole, and the linearized flow amplifies cones.
//
// The reference r-grid is carried along as moving labels so that a(r_i, t)
// and b(r_i, t) are available at fixed r:
//   d/dt s(r_i) = V(s(r_i)),  d/dt a(r_i) = (n-1)(k - 1) a,  k = b_ss / b
// with V(s) = (n-1) int_0^s (k - 1).
struct ArclengthState {
  double t = 0.0;
  int n = 3;
  double m = 1.0;
  std::vector<double> B;        // B[j] at x_j = j / M, B[0] = 0
  RadialGrid grid;              // reference grid on [0, r0]
  std::vector<double> label_x;  // s(r_i, t) / S(t)
  std::vector<double> alpha;    // a(r_i, t)

  std::size_t cells() const noexcept { return B.size() - 1; }
  double total_length() const;  // S(t)

  // Throws Error(InvalidState) for sizes, signs or label order that cannot come
  // from a smooth metric.
  void validate() const;
};

ArclengthState initial_arclength_state(const RadialGrid& grid, std::size_t cells, int n, double m);

// Samples (a, b) on the reference grid. b comes from a cubic interpolation of
// b/s at the labels.
RadialMetricState to_metric_state(const ArclengthState& state);

// Curvature at the arclength nodes; s, b_s and b_ss are in s. The boundary
// node uses the Robin slope.
CurvatureFields arclength_curvature(const ArclengthState& state, double xi_value, double eta_value);

double volume(const ArclengthState& state);

// s(r, t) for r in [0, r0], linear between labels.
double arclength_at(const ArclengthState& state, double r);

struct ArclengthRates {
  std::vector<double> dB;
  std::vector<double> dlabel;
  std::vector<double> dalpha;
};

ArclengthRates arclength_rhs(const ArclengthState& state, double eta_value);

// Explicit step bound cfl_factor * (S / M)^2.
double arclength_stable_dt(const ArclengthState& state, const SchemeConfig& scheme);

class ArclengthStepper {
 public:
  // Only the explicit scheme is supported; anything else throws Error(Config).
  ArclengthStepper(BackgroundModel model, RhoSpec rho, SchemeConfig scheme);

  ArclengthState step(const ArclengthState& state, double dt);

 private:
  void evaluate(const std::vector<double>& y, double t, std::vector<double>& dy);

  BackgroundModel model_;
  RhoSpec rho_;
  SchemeConfig scheme_;
  std::size_t cells_ = 0;
  std::size_t labels_ = 0;
  std::vector<double> y_, k_[4], stage_;
};

struct ArclengthTrajectory {
  std::vector<ArclengthState> snapshots;
  std::vector<TimeSeriesRecord> records;
  StepStatistics stats;
  bool aborted = false;
  std::string abort_reason;
};

TimeSeriesRecord make_record(const ArclengthState& state, double dt, const BackgroundModel& model,
                             const RhoSpec& rho, double r_compact);

ArclengthTrajectory integrate_arclength(const ArclengthState& start, const BackgroundModel& model,
                                        const RhoSpec& rho, const SchemeConfig& scheme,
                                        const IntegrationSettings& settings);

}  // namespace rsflow
