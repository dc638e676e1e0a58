#include "rsflow/rho.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rsflow/error.hpp"

namespace rsflow {

std::string_view to_string(RhoFamily family) {
  switch (family) {
    case RhoFamily::Zero: return "zero";
    case RhoFamily::PolySaturating: return "poly-saturating";
    case RhoFamily::RampedLogLog: return "ramped-loglog";
    case RhoFamily::CustomTable: return "custom-table";
  }
  return "zero";
}

RhoFamily parse_rho_family(std::string_view name) {
  if (name == "zero") return RhoFamily::Zero;
  if (name == "poly-saturating") return RhoFamily::PolySaturating;
  if (name == "ramped-loglog") return RhoFamily::RampedLogLog;
  if (name == "custom-table") return RhoFamily::CustomTable;
  throw Error(ErrorKind::Config, "unsupported rho family '" + std::string(name) + "'");
}

namespace {

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

// ln ln(e + t), written so that it is accurate near t = 0 where it vanishes.
double loglog(double t) { return std::log1p(std::log1p(t / std::numbers::e)); }

double loglog_derivative(double t) {
  const double inner = std::log(std::numbers::e + t);
  return 1.0 / ((std::numbers::e + t) * inner);
}

}  // namespace

// S_k(x) = x^{k+1} sum_{j=0}^{k} C(k+j, j) C(2k+1, k-j) (-x)^j on [0,1].
double smoothstep(double x, int k) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    sum += binomial(k + j, j) * binomial(2 * k + 1, k - j) * std::pow(-x, j);
  }
  return std::pow(x, k + 1) * sum;
}

double smoothstep_derivative(double x, int k) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double c = binomial(k + j, j) * binomial(2 * k + 1, k - j) * (j % 2 == 0 ? 1.0 : -1.0);
    sum += c * (k + 1 + j) * std::pow(x, k + j);
  }
  return sum;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t count = x_.size();
  if (count < 2 || y_.size() != count) {
    throw Error(ErrorKind::Config, "table needs at least two (t, value) pairs");
  }
  for (std::size_t i = 1; i < count; ++i) {
    if (!(x_[i] > x_[i - 1])) throw Error(ErrorKind::Config, "table times must increase");
  }
  std::vector<double> secant(count - 1);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  }
  slope_.assign(count, 0.0);
  slope_[0] = secant[0];
  slope_[count - 1] = secant[count - 2];
  for (std::size_t i = 1; i + 1 < count; ++i) {
    slope_[i] = secant[i - 1] * secant[i] <= 0.0 ? 0.0 : 0.5 * (secant[i - 1] + secant[i]);
  }
  for (std::size_t i = 0; i + 1 < count; ++i) {
    if (secant[i] == 0.0) {
      slope_[i] = 0.0;
      slope_[i + 1] = 0.0;
      continue;
    }
    const double alpha = slope_[i] / secant[i];
    const double beta = slope_[i + 1] / secant[i];
    const double norm = alpha * alpha + beta * beta;
    if (norm > 9.0) {
      const double tau = 3.0 / std::sqrt(norm);
      slope_[i] = tau * alpha * secant[i];
      slope_[i + 1] = tau * beta * secant[i];
    }
  }
}

std::size_t MonotoneCubic::segment(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto idx = static_cast<std::size_t>(std::distance(x_.begin(), it));
  return std::clamp<std::size_t>(idx, 1, x_.size() - 1) - 1;
}

double MonotoneCubic::value(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double u = (x - x_[i]) / h;
  const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
  const double h10 = u * (1.0 - u) * (1.0 - u);
  const double h01 = u * u * (3.0 - 2.0 * u);
  const double h11 = u * u * (u - 1.0);
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = segment(std::min(x, x_.back()));
  const double h = x_[i + 1] - x_[i];
  const double u = (x - x_[i]) / h;
  const double d00 = 6.0 * u * (u - 1.0) / h;
  const double d10 = (1.0 - u) * (1.0 - 3.0 * u);
  const double d01 = -d00;
  const double d11 = u * (3.0 * u - 2.0);
  return d00 * y_[i] + d10 * slope_[i] + d01 * y_[i + 1] + d11 * slope_[i + 1];
}

RhoSpec RhoSpec::zero() { return RhoSpec{}; }

RhoSpec RhoSpec::poly_saturating(double amplitude, int order) {
  RhoSpec rho;
  rho.family = RhoFamily::PolySaturating;
  rho.amplitude = amplitude;
  rho.order = order;
  rho.validate();
  return rho;
}

RhoSpec RhoSpec::ramped_loglog(double amplitude, int order, double t_ramp) {
  RhoSpec rho;
  rho.family = RhoFamily::RampedLogLog;
  rho.amplitude = amplitude;
  rho.order = order;
  rho.t_ramp = t_ramp;
  rho.validate();
  return rho;
}

RhoSpec RhoSpec::custom_table(std::vector<double> t, std::vector<double> values, int order,
                              double t_ramp) {
  RhoSpec rho;
  rho.family = RhoFamily::CustomTable;
  rho.amplitude = 1.0;
  rho.order = order;
  rho.t_ramp = t_ramp;
  rho.table_t = std::move(t);
  rho.table_value = std::move(values);
  rho.validate();
  return rho;
}

void RhoSpec::validate() {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorKind::Config, "rho amplitude must be finite and non-negative");
  }
  if (order < 2) throw Error(ErrorKind::Config, "rho smoothness order must be at least 2");
  if (family == RhoFamily::RampedLogLog && !(t_ramp > 0.0)) {
    throw Error(ErrorKind::Config, "ramped-loglog needs a positive ramp time");
  }
  if (family == RhoFamily::CustomTable) {
    if (!(t_ramp >= 0.0)) throw Error(ErrorKind::Config, "ramp time must be non-negative");
    table_ = MonotoneCubic(table_t, table_value);
  } else {
    table_ = MonotoneCubic();
  }
}

double RhoSpec::value(double t) const {
  switch (family) {
    case RhoFamily::Zero: return 0.0;
    case RhoFamily::PolySaturating: {
      const double p = std::pow(t, order + 1);
      return amplitude * p / (1.0 + p);
    }
    case RhoFamily::RampedLogLog:
      return amplitude * smoothstep(t / t_ramp, order) * loglog(t);
    case RhoFamily::CustomTable: {
      if (table_.empty()) throw Error(ErrorKind::Config, "custom-table rho was not validated");
      const double ramp = t_ramp > 0.0 ? smoothstep(t / t_ramp, order) : 1.0;
      return amplitude * ramp * table_.value(t);
    }
  }
  return 0.0;
}

double RhoSpec::derivative(double t) const {
  switch (family) {
    case RhoFamily::Zero: return 0.0;
    case RhoFamily::PolySaturating: {
      const double p = std::pow(t, order + 1);
      const double dp = (order + 1) * std::pow(t, order);
      return amplitude * dp / ((1.0 + p) * (1.0 + p));
    }
    case RhoFamily::RampedLogLog: {
      const double x = t / t_ramp;
      return amplitude * (smoothstep_derivative(x, order) / t_ramp * loglog(t) +
                          smoothstep(x, order) * loglog_derivative(t));
    }
    case RhoFamily::CustomTable: {
      if (table_.empty()) throw Error(ErrorKind::Config, "custom-table rho was not validated");
      if (t_ramp <= 0.0) return amplitude * table_.derivative(t);
      const double x = t / t_ramp;
      return amplitude * (smoothstep_derivative(x, order) / t_ramp * table_.value(t) +
                          smoothstep(x, order) * table_.derivative(t));
    }
  }
  return 0.0;
}

}  // namespace rsflow
