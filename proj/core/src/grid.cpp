#include "rsflow/grid.hpp"

#include <cmath>
#include <string>

#include "rsflow/error.hpp"

namespace rsflow {

RadialGrid::RadialGrid(double r0, std::size_t n_points) : r0_(r0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) {
    throw Error(ErrorKind::Config, "grid radius must be positive");
  }
  if (n_points < kMinPoints) {
    throw Error(ErrorKind::Config,
                "grid needs at least " + std::to_string(kMinPoints) + " points");
  }
  dr_ = r0 / static_cast<double>(n_points - 1);
  r_.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) r_[i] = static_cast<double>(i) * dr_;
  r_.back() = r0;
}

}  // namespace rsflow
