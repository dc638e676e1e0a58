#include "rsflow/metric_state.hpp"

#include <cmath>
#include <string>

#include "rsflow/error.hpp"

namespace rsflow {

void RadialMetricState::validate() const {
  const std::size_t count = grid.size();
  if (count < RadialGrid::kMinPoints || a.size() != count || b.size() != count) {
    throw Error(ErrorKind::InvalidState, "array sizes do not match the grid");
  }
  if (n < 2) throw Error(ErrorKind::InvalidState, "dimension must be at least 2");
  if (!(m > 0.0)) throw Error(ErrorKind::InvalidState, "scale factor m must be positive");
  for (std::size_t i = 0; i < count; ++i) {
    if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
      throw Error(ErrorKind::InvalidState, "a is not positive at node " + std::to_string(i));
    }
  }
  if (b[0] != 0.0) throw Error(ErrorKind::InvalidState, "b must vanish at the pole");
  for (std::size_t i = 1; i < count; ++i) {
    if (!(b[i] > 0.0) || !std::isfinite(b[i])) {
      throw Error(ErrorKind::DegenerateMetric, "b is not positive at node " + std::to_string(i));
    }
  }
}

RadialMetricState initial_state(const RadialGrid& grid, int n, double m) {
  RadialMetricState state;
  state.grid = grid;
  state.n = n;
  state.m = m;
  const double root_m = std::sqrt(m);
  state.a.assign(grid.size(), root_m);
  state.b.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) state.b[i] = root_m * std::sinh(grid[i]);
  state.b[0] = 0.0;
  state.validate();
  return state;
}

}  // namespace rsflow
