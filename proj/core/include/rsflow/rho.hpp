#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace rsflow {

enum class RhoFamily { Zero, PolySaturating, RampedLogLog, CustomTable };

std::string_view to_string(RhoFamily family);
RhoFamily parse_rho_family(std::string_view name);

// Generalized smoothstep of order k (C^k, vanishing to order k+1 at 0,
// identically 1 on [1, inf)) and its derivative.
double smoothstep(double x, int k);
double smoothstep_derivative(double x, int k);

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes),
// held constant outside the knot range.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double value(double x) const;
  double derivative(double x) const;
  bool empty() const noexcept { return x_.empty(); }

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

// Boundary perturbation rho(t) added to the background mean curvature.
//
//   zero            rho = 0
//   poly-saturating rho = A t^{k+1} / (1 + t^{k+1})
//   ramped-loglog   rho = A S_k(t / t_ramp) ln ln(e + t)
//   custom-table    rho = S_k(t / t_ramp) T(t), T the monotone cubic
//                   interpolant of the table (ramp skipped when t_ramp == 0)
struct RhoSpec {
  RhoFamily family = RhoFamily::Zero;
  double amplitude = 0.0;
  int order = 2;
  double t_ramp = 1.0;
  std::vector<double> table_t;
  std::vector<double> table_value;

  static RhoSpec zero();
  static RhoSpec poly_saturating(double amplitude, int order);
  static RhoSpec ramped_loglog(double amplitude, int order, double t_ramp);
  static RhoSpec custom_table(std::vector<double> t, std::vector<double> values, int order,
                              double t_ramp);

  // Checks parameters and rebuilds the table interpolant. Call after editing
  // fields directly; throws Error(Config).
  void validate();
  double value(double t) const;
  double derivative(double t) const;

 private:
  MonotoneCubic table_;
};

}  // namespace rsflow
