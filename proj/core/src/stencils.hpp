#pragma once

// Finite-difference stencils shared by the curvature kernel, the (a,b)
// integrator and the conformal integrator. All stencils are second order on a
// uniform grid with spacing h.

#include <cstddef>
#include <span>

namespace rsflow::detail {

// Centered first derivative of an even function; zero at the pole.
inline double even_first(std::span<const double> f, std::size_t i, double inv_2h) {
  return i == 0 ? 0.0 : (f[i + 1] - f[i - 1]) * inv_2h;
}

inline double one_sided_first(std::span<const double> f, std::size_t last, double inv_2h) {
  return (3.0 * f[last] - 4.0 * f[last - 1] + f[last - 2]) * inv_2h;
}

inline double one_sided_second(std::span<const double> f, std::size_t last, double inv_h2) {
  return (2.0 * f[last] - 5.0 * f[last - 1] + 4.0 * f[last - 2] - f[last - 3]) * inv_h2;
}

// Second derivative at the last node from three interior values and a known
// first derivative there. Equivalent to the centered stencil with the ghost
// value returned by robin_ghost().
inline double robin_second(std::span<const double> f, std::size_t last, double slope, double h) {
  return (8.0 * f[last - 1] - f[last - 2] - 7.0 * f[last] + 6.0 * h * slope) / (2.0 * h * h);
}

inline double robin_ghost(std::span<const double> f, std::size_t last, double slope, double h) {
  return 2.0 * f[last] - f[last - 1] + h * h * robin_second(f, last, slope, h);
}

// b/r at node j >= 1; at the pole the even extrapolation (4 beta_1 - beta_2)/3.
inline double pole_ratio(std::span<const double> b, std::span<const double> r, std::size_t j) {
  if (j == 0) return (4.0 * b[1] / r[1] - b[2] / r[2]) / 3.0;
  return b[j] / r[j];
}

// b_r at an interior node from centered differences of beta = b/r:
// b_r = beta + r beta_r. The error is O(h^2 r^2) because beta_rrr is odd.
inline double regularized_b_r(std::span<const double> b, std::span<const double> r, std::size_t i,
                              double inv_2h) {
  const double beta_minus = pole_ratio(b, r, i - 1);
  const double beta_plus = b[i + 1] / r[i + 1];
  return b[i] / r[i] + r[i] * (beta_plus - beta_minus) * inv_2h;
}

// Limit of -b_ss / b at the pole for b odd and a even in r.
// With beta = b/r: K(0) = -(3 beta''(0)/beta(0) - a''(0)/a(0)) / a(0)^2.
inline double pole_sectional_curvature(std::span<const double> a, std::span<const double> b,
                                       std::span<const double> r, double h) {
  const double beta0 = pole_ratio(b, r, 0);
  const double beta_rr = 2.0 * (b[2] / r[2] - b[1] / r[1]) / (3.0 * h * h);
  const double a_rr = 2.0 * (a[1] - a[0]) / (h * h);
  return -(3.0 * beta_rr / beta0 - a_rr / a[0]) / (a[0] * a[0]);
}

}  // namespace rsflow::detail
