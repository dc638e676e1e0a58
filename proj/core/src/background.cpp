#include "rsflow/background.hpp"

#include <cmath>

#include "rsflow/error.hpp"

namespace rsflow {

namespace {

void require_nonnegative_time(double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::Domain, "time must be non-negative");
}

}  // namespace

void BackgroundModel::validate() const {
  if (n < 2) throw Error(ErrorKind::Config, "dimension n must be at least 2");
  if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorKind::Config, "m must be positive");
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw Error(ErrorKind::Config, "r0 must be positive");
}

double xi(double t, const BackgroundModel& model) {
  require_nonnegative_time(t);
  return 1.0 + std::exp(-2.0 * (model.n - 1) * t) * (model.m - 1.0);
}

double xi_derivative(double t, const BackgroundModel& model) {
  return 2.0 * (model.n - 1) * (1.0 - xi(t, model));
}

RadialMetricState background_state(double t, const BackgroundModel& model, const RadialGrid& grid) {
  const double scale = std::sqrt(xi(t, model));
  RadialMetricState state;
  state.t = t;
  state.grid = grid;
  state.n = model.n;
  state.m = model.m;
  state.a.assign(grid.size(), scale);
  state.b.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) state.b[i] = scale * std::sinh(grid[i]);
  state.b[0] = 0.0;
  return state;
}

double background_mean_curvature(double t, const BackgroundModel& model) {
  return (model.n - 1) / std::sqrt(xi(t, model)) / std::tanh(model.r0);
}

// d/dt xi^{-1/2} = -xi'/(2 xi^{3/2}).
double background_mean_curvature_derivative(double t, const BackgroundModel& model) {
  const double x = xi(t, model);
  return -(model.n - 1) * xi_derivative(t, model) / (2.0 * x * std::sqrt(x)) / std::tanh(model.r0);
}

double eta(double t, const BackgroundModel& model, const RhoSpec& rho) {
  return background_mean_curvature(t, model) + rho.value(t);
}

double eta_derivative(double t, const BackgroundModel& model, const RhoSpec& rho) {
  return background_mean_curvature_derivative(t, model) + rho.derivative(t);
}

TimeTransform time_transform(double t_normalized, int n) {
  require_nonnegative_time(t_normalized);
  const double rate = 2.0 * (n - 1);
  return {std::expm1(rate * t_normalized) / rate, std::exp(-rate * t_normalized)};
}

double inverse_time_transform(double t_unnormalized, int n) {
  require_nonnegative_time(t_unnormalized);
  const double rate = 2.0 * (n - 1);
  return std::log1p(rate * t_unnormalized) / rate;
}

}  // namespace rsflow
