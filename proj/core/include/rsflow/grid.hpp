#pragma once

#include <cstddef>
#include <vector>

namespace rsflow {

// Uniform radial grid on [0, r0] in the geodesic polar coordinate of the
// initial hyperbolic metric.
class RadialGrid {
 public:
  static constexpr std::size_t kMinPoints = 64;

  RadialGrid() = default;
  RadialGrid(double r0, std::size_t n_points);

  double r0() const noexcept { return r0_; }
  double dr() const noexcept { return dr_; }
  std::size_t size() const noexcept { return r_.size(); }
  std::size_t last() const noexcept { return r_.size() - 1; }
  const std::vector<double>& r() const noexcept { return r_; }
  double operator[](std::size_t i) const noexcept { return r_[i]; }

  bool operator==(const RadialGrid& other) const noexcept {
    return r0_ == other.r0_ && r_.size() == other.r_.size();
  }

 private:
  double r0_ = 0.0;
  double dr_ = 0.0;
  std::vector<double> r_;
};

}  // namespace rsflow
