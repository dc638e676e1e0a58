#pragma once

#include "rsflow/grid.hpp"
#include "rsflow/metric_state.hpp"
#include "rsflow/rho.hpp"

namespace rsflow {

// The homothetic solution xi(t) g_{-1} of the normalized flow on hyperbolic
// space, restricted to the geodesic ball of radius r0.
struct BackgroundModel {
  int n = 3;
  double m = 1.0;
  double r0 = 1.0;

  void validate() const;
};

// xi(t) = 1 + e^{-2(n-1)t} (m - 1); throws Domain for t < 0.
double xi(double t, const BackgroundModel& model);
// xi'(t) = 2(n-1)(1 - xi).
double xi_derivative(double t, const BackgroundModel& model);

// a = xi^{1/2}, b = xi^{1/2} sinh r.
RadialMetricState background_state(double t, const BackgroundModel& model, const RadialGrid& grid);

// (n-1) xi^{-1/2} coth(r0); for n = 2 this is the boundary geodesic curvature.
double background_mean_curvature(double t, const BackgroundModel& model);
double background_mean_curvature_derivative(double t, const BackgroundModel& model);

// Prescribed boundary mean curvature eta(t) = H_background(t) + rho(t).
double eta(double t, const BackgroundModel& model, const RhoSpec& rho);
double eta_derivative(double t, const BackgroundModel& model, const RhoSpec& rho);

// Normalized time t maps to unnormalized Ricci-flow time
// (e^{2(n-1)t} - 1) / (2(n-1)); the metric is rescaled by e^{-2(n-1)t}.
struct TimeTransform {
  double unnormalized_time;
  double metric_scale;
};

TimeTransform time_transform(double t_normalized, int n);
double inverse_time_transform(double t_unnormalized, int n);

}  // namespace rsflow
