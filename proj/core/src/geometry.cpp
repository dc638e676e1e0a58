#include "rsflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rsflow/error.hpp"
#include "stencils.hpp"

namespace rsflow {

RadialDerivatives radial_derivatives(const RadialMetricState& state,
                                     std::optional<double> boundary_b_r) {
  const std::span<const double> a(state.a);
  const std::span<const double> b(state.b);
  const std::span<const double> r(state.grid.r());
  const std::size_t last = state.grid.last();
  const double h = state.grid.dr();
  const double inv_2h = 0.5 / h;
  const double inv_h2 = 1.0 / (h * h);

  RadialDerivatives d;
  d.a_r.resize(a.size());
  d.b_r.resize(a.size());
  d.b_rr.resize(a.size());

  d.a_r[0] = 0.0;
  d.b_r[0] = detail::pole_ratio(b, r, 0);
  d.b_rr[0] = 0.0;
  for (std::size_t i = 1; i < last; ++i) {
    d.a_r[i] = detail::even_first(a, i, inv_2h);
    d.b_r[i] = detail::regularized_b_r(b, r, i, inv_2h);
    d.b_rr[i] = (b[i + 1] - 2.0 * b[i] + b[i - 1]) * inv_h2;
  }
  d.a_r[last] = detail::one_sided_first(a, last, inv_2h);
  if (boundary_b_r) {
    d.b_r[last] = *boundary_b_r;
    d.b_rr[last] = detail::robin_second(b, last, *boundary_b_r, h);
  } else {
    d.b_r[last] = detail::one_sided_first(b, last, inv_2h);
    d.b_rr[last] = detail::one_sided_second(b, last, inv_h2);
  }
  return d;
}

std::vector<double> arclength(const RadialMetricState& state) {
  const auto& a = state.a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0)) {
      throw Error(ErrorKind::InvalidState, "a is not positive at node " + std::to_string(i));
    }
  }
  // Trapezoid written as r_i times the mean cell average, so a constant a
  // reproduces c r_i without accumulated rounding.
  const auto& r = state.grid.r();
  std::vector<double> s(a.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    sum += 0.5 * (a[i - 1] + a[i]);
    s[i] = r[i] * (sum / static_cast<double>(i));
  }
  return s;
}

CurvatureFields curvature(const RadialMetricState& state, double xi_value,
                          std::optional<double> eta) {
  state.validate();
  const int n = state.n;
  const std::size_t count = state.grid.size();
  const std::size_t last = state.grid.last();
  const auto& a = state.a;
  const auto& b = state.b;

  std::optional<double> slope;
  if (eta) slope = a[last] * (*eta) * b[last] / (n - 1);
  const RadialDerivatives d = radial_derivatives(state, slope);

  CurvatureFields f;
  f.xi = xi_value;
  f.n = n;
  f.s = arclength(state);
  f.b_s.resize(count);
  f.b_ss.resize(count);
  f.K.resize(count);
  f.L.resize(count);
  f.H.resize(count);

  for (std::size_t i = 0; i < count; ++i) {
    f.b_s[i] = d.b_r[i] / a[i];
    f.b_ss[i] = (d.b_rr[i] - d.a_r[i] * d.b_r[i] / a[i]) / (a[i] * a[i]);
  }
  f.K[0] = detail::pole_sectional_curvature(a, b, state.grid.r(), state.grid.dr());
  f.L[0] = f.K[0];
  f.H[0] = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < count; ++i) {
    f.K[i] = -f.b_ss[i] / b[i];
    f.L[i] = (1.0 - f.b_s[i] * f.b_s[i]) / (b[i] * b[i]);
    f.H[i] = (n - 1) * f.b_s[i] / b[i];
  }

  const double shift = (n - 1) / xi_value;
  f.F1.resize(count);
  f.F2.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    f.F1[i] = (n - 1) * f.K[i] + shift;
    f.F2[i] = f.K[i] + (n - 2) * f.L[i] + shift;
  }
  f.R_circ = shifted_scalar_curvature(f, xi_value, n);
  return f;
}

std::vector<double> mean_curvature(const RadialMetricState& state) {
  state.validate();
  const RadialDerivatives d = radial_derivatives(state);
  std::vector<double> H(state.grid.size() - 1);
  for (std::size_t i = 1; i < state.grid.size(); ++i) {
    H[i - 1] = (state.n - 1) * d.b_r[i] / (state.a[i] * state.b[i]);
  }
  return H;
}

double mean_curvature_at(const RadialMetricState& state, std::size_t i) {
  if (i == 0) throw Error(ErrorKind::PoleUndefined, "mean curvature is undefined at the pole");
  if (i >= state.grid.size()) throw Error(ErrorKind::Domain, "node index out of range");
  return mean_curvature(state)[i - 1];
}

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double volume(const RadialMetricState& state) {
  state.validate();
  const auto& a = state.a;
  const auto& b = state.b;
  const int power = state.n - 1;
  auto integrand = [&](std::size_t i) { return a[i] * std::pow(b[i], power); };
  double sum = 0.5 * (integrand(0) + integrand(state.grid.last()));
  for (std::size_t i = 1; i < state.grid.last(); ++i) sum += integrand(i);
  return unit_sphere_area(state.n) * sum * state.grid.dr();
}

std::vector<double> shifted_scalar_curvature(const CurvatureFields& fields, double xi_value, int n) {
  std::vector<double> out(fields.F1.size());
  const double offset = n * (n - 1) * (1.0 - 1.0 / xi_value);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = fields.F1[i] + (n - 1) * fields.F2[i] + offset;
  }
  return out;
}

}  // namespace rsflow
