#pragma once

#include <vector>

#include "rsflow/grid.hpp"

namespace rsflow {

// Discretized rotationally symmetric metric g = a^2 dr^2 + b^2 g_{S^{n-1}}.
struct RadialMetricState {
  double t = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  RadialGrid grid;
  int n = 3;
  double m = 1.0;

  // Throws Error(InvalidState) unless a > 0, b[0] == 0 and b > 0 off the pole.
  void validate() const;
};

// a = sqrt(m), b = sqrt(m) sinh r.
RadialMetricState initial_state(const RadialGrid& grid, int n, double m);

}  // namespace rsflow
