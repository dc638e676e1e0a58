#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rsflow/metric_state.hpp"

namespace rsflow {

// r-derivatives of the metric coefficients on the grid.
//
// Near the pole b_r is taken from centered differences of the even function
// b/r, which keeps 1 - b_s^2 accurate to O(dr^2 s^2) so that L = (1-b_s^2)/b^2
// stays second order up to the first node. At r0 either one-sided stencils
// are used or, when a boundary slope is supplied, the Robin ghost value.
struct RadialDerivatives {
  std::vector<double> a_r;
  std::vector<double> b_r;
  std::vector<double> b_rr;
};

RadialDerivatives radial_derivatives(const RadialMetricState& state,
                                     std::optional<double> boundary_b_r = std::nullopt);

struct CurvatureFields {
  std::vector<double> s;
  std::vector<double> b_s;
  std::vector<double> b_ss;
  std::vector<double> K;
  std::vector<double> L;
  std::vector<double> F1;
  std::vector<double> F2;
  std::vector<double> H;  // H[0] is NaN: the mean curvature blows up at the pole.
  std::vector<double> R_circ;
  double xi = 1.0;
  int n = 3;
};

std::vector<double> arclength(const RadialMetricState& state);

// Curvature quantities of the state with shifts taken at xi_value = xi(t).
// If eta is given, the boundary node uses the Robin slope b_s = eta b/(n-1)
// instead of one-sided stencils.
CurvatureFields curvature(const RadialMetricState& state, double xi_value,
                          std::optional<double> eta = std::nullopt);

// H = (n-1) b_s / b at nodes 1..last (element k is node k+1).
std::vector<double> mean_curvature(const RadialMetricState& state);

// Mean curvature of the geodesic sphere through node i; i == 0 throws PoleUndefined.
double mean_curvature_at(const RadialMetricState& state, std::size_t i);

// omega_n * int_0^r0 a b^{n-1} dr with omega_n = 2 pi^{n/2} / Gamma(n/2).
double volume(const RadialMetricState& state);

double unit_sphere_area(int n);

// R_circ = F1 + (n-1) F2 + n(n-1)(1 - 1/xi).
std::vector<double> shifted_scalar_curvature(const CurvatureFields& fields, double xi_value, int n);

}  // namespace rsflow
