#include "rsflow/validator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "rsflow/error.hpp"

namespace rsflow {

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "fail";
}

std::string_view to_string(RhoTarget target) {
  return target == RhoTarget::HigherDimensional ? "higher-dimensional" : "two-dimensional";
}

RhoTarget parse_rho_target(std::string_view name) {
  if (name == "higher-dimensional") return RhoTarget::HigherDimensional;
  if (name == "two-dimensional") return RhoTarget::TwoDimensional;
  throw Error(ErrorKind::Config, "unknown validator target '" + std::string(name) + "'");
}

Verdict RhoValidationReport::overall() const {
  bool indeterminate = false;
  for (const auto& c : conditions) {
    if (c.verdict == Verdict::Fail) return Verdict::Fail;
    if (c.verdict == Verdict::Indeterminate) indeterminate = true;
  }
  return indeterminate ? Verdict::Indeterminate : Verdict::Pass;
}

const ConditionResult* RhoValidationReport::find(std::string_view id) const {
  for (const auto& c : conditions) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::string RhoValidationReport::to_text() const {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "rho-validation target=%s samples=%d spacing=%.6g overall=%s\n",
                std::string(to_string(target)).c_str(), n_samples, sample_spacing,
                std::string(to_string(overall())).c_str());
  out += line;
  for (const auto& c : conditions) {
    std::snprintf(line, sizeof line, "condition %s verdict=%s margin=%.9e t=%.9g  # %s%s%s\n",
                  c.id.c_str(), std::string(to_string(c.verdict)).c_str(), c.worst_margin,
                  c.worst_time, c.description.c_str(), c.note.empty() ? "" : "; ",
                  c.note.c_str());
    out += line;
  }
  return out;
}

namespace {

constexpr double kRelativeResolution = 1e-12;

ConditionResult make_result(std::string id, std::string description) {
  ConditionResult result;
  result.id = std::move(id);
  result.description = std::move(description);
  return result;
}

struct Sides {
  double lhs;
  double rhs;
};

class Sampler {
 public:
  Sampler(const ValidatorConfig& config) : config_(config) {
    spacing_ = config.t_max / config.n_samples;
  }

  double spacing() const { return spacing_; }
  double time(int i) const { return i * spacing_; }
  int count() const { return config_.n_samples + 1; }

  // lhs >= rhs at every sample with t in [t_from, t_to]. Margins within the
  // round-off resolution of the compared quantities are indeterminate.
  ConditionResult nonstrict(std::string id, std::string description, double t_from, double t_to,
                            const std::function<Sides(double)>& sides) const {
    ConditionResult result = make_result(std::move(id), std::move(description));
    double worst = std::numeric_limits<double>::infinity();
    double worst_t = t_from;
    double scale = 0.0;
    for (int i = 0; i < count(); ++i) {
      const double t = time(i);
      if (t < t_from || t > t_to) continue;
      const Sides s = sides(t);
      scale = std::max({scale, std::abs(s.lhs), std::abs(s.rhs)});
      const double margin = s.lhs - s.rhs;
      if (margin < worst) {
        worst = margin;
        worst_t = t;
      }
    }
    if (!std::isfinite(worst)) {
      result.note = "no samples in range";
      result.verdict = Verdict::Indeterminate;
      return result;
    }
    const double resolution = kRelativeResolution * std::max(scale, 1e-300);
    result.worst_margin = worst;
    result.worst_time = worst_t;
    if (worst >= 0.0) {
      result.verdict = Verdict::Pass;
    } else if (worst >= -resolution) {
      result.verdict = Verdict::Indeterminate;
      result.note = "margin below sampling resolution";
    } else {
      result.verdict = Verdict::Fail;
    }
    return result;
  }

 private:
  const ValidatorConfig& config_;
  double spacing_;
};

ConditionResult vacuous(std::string id, std::string description) {
  ConditionResult result = make_result(std::move(id), std::move(description));
  result.note = "vacuous for m <= 1";
  return result;
}

// rho^{(j)}(0) = 0 for j <= k is equivalent (for C^{k+1} rho) to rho(h)/h^{k+1}
// staying bounded as h -> 0. The ratio of that quotient across one halving is
// 2^{k+1-p} when rho ~ t^p, so it is <= 1 for p >= k+1 and >= 2 otherwise.
ConditionResult check_compatibility(const RhoSpec& rho, int k) {
  ConditionResult result = make_result("compatibility", "rho(0) = rho^(j)(0) = 0 for j <= k");
  const double at_zero = std::abs(rho.value(0.0));
  if (at_zero > 0.0) {
    result.verdict = Verdict::Fail;
    result.worst_margin = -at_zero;
    result.note = "rho(0) != 0";
    return result;
  }
  double h = 1e-2;
  double previous = std::abs(rho.value(h)) / std::pow(h, k + 1);
  double ratio = 0.0;
  for (int level = 0; level < 6; ++level) {
    h *= 0.5;
    const double current = std::abs(rho.value(h)) / std::pow(h, k + 1);
    ratio = previous > 0.0 ? current / previous : (current > 0.0 ? 2.0 : 0.0);
    previous = current;
  }
  result.worst_margin = 1.5 - ratio;
  result.worst_time = h;
  char note[128];
  std::snprintf(note, sizeof note, "k=%d quotient ratio per halving %.4f", k, ratio);
  result.note = note;
  if (ratio <= 1.25) {
    result.verdict = Verdict::Pass;
  } else if (ratio >= 1.75) {
    result.verdict = Verdict::Fail;
  } else {
    result.verdict = Verdict::Indeterminate;
  }
  return result;
}

ConditionResult check_initial_positivity(const RhoSpec& rho, const Sampler& sampler,
                                         double window) {
  ConditionResult result = make_result("initial-positivity", "rho' > 0 on an initial interval (0, t0)");
  double scale = 0.0;
  for (int i = 0; i < sampler.count(); ++i) {
    scale = std::max(scale, std::abs(rho.derivative(sampler.time(i))));
  }
  const double resolution = kRelativeResolution * std::max(scale, 1e-300);
  const double first_t = sampler.time(1);
  const double first = rho.derivative(first_t);
  result.worst_time = first_t;
  result.worst_margin = first;
  if (first <= 0.0) {
    result.verdict = Verdict::Fail;
    result.note = "rho' vanishes at the first sample";
    return result;
  }
  if (first <= resolution) {
    result.verdict = Verdict::Indeterminate;
    result.note = "rho' below resolution at the first sample";
    return result;
  }
  // Report the largest sampled interval (0, t0] inside the window where rho' > 0.
  double t0 = first_t;
  double worst = first;
  double worst_t = first_t;
  for (int i = 2; i < sampler.count() && sampler.time(i) <= window; ++i) {
    const double d = rho.derivative(sampler.time(i));
    if (d <= 0.0) break;
    t0 = sampler.time(i);
    if (d < worst) {
      worst = d;
      worst_t = t0;
    }
  }
  result.worst_margin = worst;
  result.worst_time = worst_t;
  char note[96];
  std::snprintf(note, sizeof note, "positive on (0, %.6g]", t0);
  result.note = note;
  return result;
}

}  // namespace

RhoValidationReport validate_rho(const RhoSpec& rho, const BackgroundModel& model,
                                 const ValidatorConfig& config) {
  model.validate();
  if (!(config.t_max > 0.0)) throw Error(ErrorKind::Config, "validator horizon must be positive");
  if (config.n_samples < 1000) throw Error(ErrorKind::Config, "validator needs >= 1000 samples");
  if (config.target == RhoTarget::TwoDimensional && model.n != 2) {
    throw Error(ErrorKind::Config, "the two-dimensional target requires n = 2");
  }
  if (config.target == RhoTarget::HigherDimensional && model.n < 3) {
    throw Error(ErrorKind::Config, "the higher-dimensional target requires n >= 3");
  }

  const Sampler sampler(config);
  const int n = model.n;
  const double inf = std::numeric_limits<double>::infinity();
  auto shrink = [&](double t) { return 1.0 - 1.0 / xi(t, model); };

  RhoValidationReport report;
  report.target = config.target;
  report.n_samples = config.n_samples;
  report.sample_spacing = sampler.spacing();

  report.conditions.push_back(check_compatibility(rho, rho.order));
  report.conditions.push_back(sampler.nonstrict(
      "monotone", "rho'(t) >= 0", 0.0, inf, [&](double t) { return Sides{rho.derivative(t), 0.0}; }));

  double window = config.positivity_window;
  if (rho.family == RhoFamily::RampedLogLog ||
      (rho.family == RhoFamily::CustomTable && rho.t_ramp > 0.0)) {
    window = rho.t_ramp;
  }
  report.conditions.push_back(check_initial_positivity(rho, sampler, window));

  const bool shrinking = model.m > 1.0;
  if (config.target == RhoTarget::HigherDimensional) {
    const std::string near_desc = "rho' >= (n-1+sigma)(1-1/xi) rho near t = 0";
    if (shrinking) {
      report.conditions.push_back(
          sampler.nonstrict("growth-near-zero", near_desc, 0.0, config.near_zero_window,
                            [&](double t) {
                              return Sides{rho.derivative(t),
                                           (n - 1 + config.sigma) * shrink(t) * rho.value(t)};
                            }));
    } else {
      report.conditions.push_back(vacuous("growth-near-zero", near_desc));
    }
  }

  const std::string global_desc = "rho' >= (n-1)(1-1/xi) rho for t >= 0";
  if (shrinking) {
    report.conditions.push_back(sampler.nonstrict(
        "growth-global", global_desc, 0.0, inf,
        [&](double t) { return Sides{rho.derivative(t), (n - 1) * shrink(t) * rho.value(t)}; }));
  } else {
    report.conditions.push_back(vacuous("growth-global", global_desc));
  }

  if (config.target == RhoTarget::TwoDimensional) {
    report.conditions.push_back(sampler.nonstrict(
        "eta-upper", "eta <= y^{1/3} - 2 with y' = 3y + 1", 0.0, inf, [&](double t) {
          const double y = (config.y0 + 1.0 / 3.0) * std::exp(3.0 * t) - 1.0 / 3.0;
          return Sides{std::cbrt(y) - 2.0, eta(t, model, rho)};
        }));
    auto tail = [&](double t) { return config.epsilon / ((1.0 + t) * std::log1p(t)); };
    if (shrinking) {
      report.conditions.push_back(sampler.nonstrict(
          "tail-growth", "rho' - (1-1/xi) rho >= eps / ((1+t) ln(1+t)) for t >= T",
          config.tail_start, inf, [&](double t) {
            return Sides{rho.derivative(t) - shrink(t) * rho.value(t), tail(t)};
          }));
    } else {
      report.conditions.push_back(sampler.nonstrict(
          "tail-growth", "rho' >= eps / ((1+t) ln(1+t)) for t >= T", config.tail_start, inf,
          [&](double t) { return Sides{rho.derivative(t), tail(t)}; }));
    }
  }
  return report;
}

}  // namespace rsflow
