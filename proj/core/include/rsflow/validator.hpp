#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rsflow/background.hpp"
#include "rsflow/rho.hpp"

namespace rsflow {

enum class Verdict { Pass, Fail, Indeterminate };

std::string_view to_string(Verdict verdict);

// Which set of hypotheses is checked: the n >= 3
// result (compatibility, monotonicity, and for m > 1 the two linear growth
// inequalities) or the n = 2 result (adds the upper bound eta <= y^{1/3} - 2
// and the logarithmic tail growth).
enum class RhoTarget { HigherDimensional, TwoDimensional };

std::string_view to_string(RhoTarget target);
RhoTarget parse_rho_target(std::string_view name);

struct ValidatorConfig {
  RhoTarget target = RhoTarget::HigherDimensional;
  double t_max = 20.0;
  int n_samples = 4000;
  double sigma = 0.1;             // extra rate in rho' >= (n-1+sigma)(1-1/xi) rho near 0
  double near_zero_window = 0.1;  // length of the window where that holds
  double epsilon = 1e-3;          // tail growth constant
  double tail_start = 1.0;        // T in the tail growth condition
  double y0 = 1000.0;             // y(t) = (y0 + 1/3) e^{3t} - 1/3 solves y' = 3y + 1
  double positivity_window = 1.0; // rho' > 0 is required on (0, positivity_window]
};

struct ConditionResult {
  std::string id;
  std::string description;
  Verdict verdict = Verdict::Pass;
  double worst_margin = 0.0;  // negative = violation magnitude
  double worst_time = 0.0;
  std::string note;
};

struct RhoValidationReport {
  RhoTarget target = RhoTarget::HigherDimensional;
  std::vector<ConditionResult> conditions;
  double sample_spacing = 0.0;
  int n_samples = 0;

  Verdict overall() const;
  const ConditionResult* find(std::string_view id) const;
  std::string to_text() const;
};

// Samples rho on [0, t_max] and checks each hypothesis of the target.
// Throws Error(Config) for unsupported settings.
RhoValidationReport validate_rho(const RhoSpec& rho, const BackgroundModel& model,
                                 const ValidatorConfig& config);

}  // namespace rsflow
