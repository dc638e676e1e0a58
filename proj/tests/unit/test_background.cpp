#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rsflow/background.hpp"
#include "rsflow/error.hpp"
#include "rsflow/geometry.hpp"
#include "rsflow/validator.hpp"

using namespace rsflow;

TEST(Xi, ClosedForm) {
  EXPECT_DOUBLE_EQ(xi(0.0, {3, 2.0, 1.0}), 2.0);
  EXPECT_DOUBLE_EQ(xi(0.0, {2, 0.5, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(xi(7.0, {4, 1.0, 1.0}), 1.0);
  EXPECT_NEAR(xi(0.25, {3, 2.0, 1.0}), 1.0 + std::exp(-1.0), 1e-15);
  EXPECT_NEAR(xi(0.25, {3, 2.0, 1.0}), 1.367879, 1e-6);
  EXPECT_THROW(xi(-0.1, {3, 2.0, 1.0}), Error);
}

TEST(Background, LongTimeLimit) {
  const RadialGrid grid(1.0, 101);
  const auto s = background_state(40.0, {3, 2.0, 1.0}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(s.a[i], 1.0, 1e-15);
    EXPECT_NEAR(s.b[i], std::sinh(grid[i]), 1e-15);
  }
}

TEST(Background, DiscreteCurvatureIsFlatShift) {
  // On the r-grid the kernel sees sinh through finite differences, so the
  // shifted curvatures vanish only to O(dr^2).
  const BackgroundModel model{3, 2.0, 1.0};
  double prev = 0.0;
  for (std::size_t pts : {501u, 1001u}) {
    const RadialGrid grid(1.0, pts);
    const auto f = curvature(background_state(1.0, model, grid), xi(1.0, model));
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max({worst, std::abs(f.F1[i]), std::abs(f.F2[i])});
    }
    EXPECT_LT(worst, 1e-5);
    if (prev > 0.0) EXPECT_NEAR(std::log2(prev / worst), 2.0, 0.2);
    prev = worst;
  }
}

TEST(BackgroundMeanCurvature, Values) {
  EXPECT_NEAR(background_mean_curvature(0.0, {3, 1.0, 1.0}), 2.626070, 1e-6);
  EXPECT_NEAR(background_mean_curvature(3.0, {2, 1.0, 0.7}), 1.0 / std::tanh(0.7), 1e-14);
}

TEST(BackgroundMeanCurvature, MatchesKernelAtBoundary) {
  const BackgroundModel model{3, 2.0, 1.0};
  double prev = 0.0;
  for (std::size_t pts : {101u, 201u, 401u}) {
    const RadialGrid grid(1.0, pts);
    const double h = mean_curvature(background_state(0.5, model, grid)).back();
    const double err = std::abs(h - background_mean_curvature(0.5, model));
    if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.8);
    prev = err;
  }
}

TEST(Eta, ZeroRhoIsBackground) {
  const BackgroundModel model{3, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(eta(0.7, model, RhoSpec::zero()), background_mean_curvature(0.7, model));
}

TEST(Eta, PolySaturatingComposition) {
  const BackgroundModel model{3, 2.0, 1.0};
  const double want = 2.0 / std::sqrt(xi(1.0, model)) / std::tanh(1.0) + 0.1 * 0.5;
  EXPECT_NEAR(eta(1.0, model, RhoSpec::poly_saturating(0.1, 2)), want, 1e-14);
}

TEST(Eta, DerivativeMatchesDifference) {
  const BackgroundModel model{2, 0.5, 1.0};
  const RhoSpec rho = RhoSpec::ramped_loglog(0.1, 2, 1.0);
  for (double t : {0.3, 1.2, 4.0}) {
    const double h = 1e-5;
    const double fd = (eta(t + h, model, rho) - eta(t - h, model, rho)) / (2 * h);
    EXPECT_NEAR(eta_derivative(t, model, rho), fd, 1e-8);
  }
}

TEST(TimeTransform, Values) {
  EXPECT_DOUBLE_EQ(time_transform(0.0, 3).unnormalized_time, 0.0);
  EXPECT_NEAR(time_transform(0.25, 3).unnormalized_time, (std::numbers::e - 1.0) / 4.0, 1e-15);
  EXPECT_NEAR(time_transform(0.25, 3).unnormalized_time, 0.429570, 1e-6);
  for (double t : {0.01, 0.5, 3.0}) {
    EXPECT_NEAR(inverse_time_transform(time_transform(t, 4).unnormalized_time, 4), t, 1e-12);
  }
  EXPECT_THROW(time_transform(-1.0, 3), Error);
}

TEST(Rho, SmoothstepVanishesToOrder) {
  for (int k : {1, 2, 3}) {
    EXPECT_DOUBLE_EQ(smoothstep(0.0, k), 0.0);
    EXPECT_DOUBLE_EQ(smoothstep(1.0, k), 1.0);
    EXPECT_DOUBLE_EQ(smoothstep(2.0, k), 1.0);
    const double q1 = smoothstep(1e-2, k) / std::pow(1e-2, k + 1);
    const double q2 = smoothstep(5e-3, k) / std::pow(5e-3, k + 1);
    EXPECT_NEAR(q2 / q1, 1.0, 0.05);
  }
}

TEST(Rho, TableInterpolantIsMonotone) {
  const MonotoneCubic c({0.0, 1.0, 2.0, 3.0}, {0.0, 0.05, 0.06, 0.2});
  double prev = c.value(0.0);
  for (int i = 1; i <= 300; ++i) {
    const double v = c.value(0.01 * i);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
  EXPECT_DOUBLE_EQ(c.value(5.0), 0.2);
}

namespace {

ValidatorConfig higher() { return ValidatorConfig{}; }

}  // namespace

TEST(Validator, AdmissiblePolySaturating) {
  const auto rep = validate_rho(RhoSpec::poly_saturating(0.1, 2), {3, 0.5, 1.0}, higher());
  EXPECT_EQ(rep.overall(), Verdict::Pass) << rep.to_text();
  EXPECT_NE(rep.find("growth-global")->note.find("vacuous"), std::string::npos);
}

TEST(Validator, ZeroFailsInitialPositivityOnly) {
  const auto rep = validate_rho(RhoSpec::zero(), {3, 0.5, 1.0}, higher());
  EXPECT_EQ(rep.overall(), Verdict::Fail);
  for (const auto& c : rep.conditions) {
    if (c.id == "initial-positivity") {
      EXPECT_EQ(c.verdict, Verdict::Fail);
    } else {
      EXPECT_EQ(c.verdict, Verdict::Pass) << c.id;
    }
  }
}

TEST(Validator, NonMonotoneTable) {
  const RhoSpec rho = RhoSpec::custom_table({0.0, 1.0, 2.0, 3.0}, {0.0, 0.1, 0.05, 0.2}, 2, 0.5);
  const auto rep = validate_rho(rho, {3, 0.5, 1.0}, higher());
  const auto* c = rep.find("monotone");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->verdict, Verdict::Fail);
  EXPECT_GE(c->worst_time, 1.0);
  EXPECT_LE(c->worst_time, 2.0);
}

TEST(Validator, NonzeroInitialSlope) {
  const RhoSpec rho = RhoSpec::custom_table({0.0, 1.0, 5.0}, {0.0, 0.1, 0.2}, 2, 0.0);
  const auto rep = validate_rho(rho, {3, 0.5, 1.0}, higher());
  EXPECT_EQ(rep.find("compatibility")->verdict, Verdict::Fail);
  EXPECT_EQ(rep.find("monotone")->verdict, Verdict::Pass);
}

TEST(Validator, ShrinkingBackgroundNeedsGlobalGrowth) {
  // Saturates at t = 0.6 while 1 - 1/xi is still far from zero.
  const RhoSpec rho = RhoSpec::custom_table({0.0, 0.3, 0.6}, {0.0, 0.05, 0.06}, 2, 0.2);
  const auto rep = validate_rho(rho, {3, 2.0, 1.0}, higher());
  const auto* c = rep.find("growth-global");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->verdict, Verdict::Fail) << rep.to_text();
  EXPECT_GT(c->worst_time, 0.5);
  EXPECT_EQ(rep.find("monotone")->verdict, Verdict::Pass);
  EXPECT_EQ(rep.find("compatibility")->verdict, Verdict::Pass);
}

TEST(Validator, MarginBelowResolution) {
  const RhoSpec rho =
      RhoSpec::custom_table({0.0, 1.0, 2.0, 3.0}, {0.0, 0.1, 0.1 - 1e-15, 0.2}, 2, 0.5);
  const auto rep = validate_rho(rho, {3, 0.5, 1.0}, higher());
  EXPECT_EQ(rep.find("monotone")->verdict, Verdict::Indeterminate) << rep.to_text();
  EXPECT_EQ(rep.overall(), Verdict::Indeterminate);
}

TEST(Validator, TwoDimensionalTarget) {
  ValidatorConfig cfg;
  cfg.target = RhoTarget::TwoDimensional;
  const auto rep = validate_rho(RhoSpec::ramped_loglog(0.1, 2, 1.0), {2, 2.0, 1.0}, cfg);
  EXPECT_EQ(rep.overall(), Verdict::Pass) << rep.to_text();
  EXPECT_NE(rep.find("eta-upper"), nullptr);
  EXPECT_NE(rep.find("tail-growth"), nullptr);
  EXPECT_EQ(rep.find("growth-near-zero"), nullptr);
}

TEST(Background, CurvatureKernelAtFineGrid) {
  const BackgroundModel model{3, 2.0, 1.0};
  const RadialGrid grid(1.0, 1001);
  const auto f = curvature(background_state(1.0, model, grid), xi(1.0, model));
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max({worst, std::abs(f.F1[i]), std::abs(f.F2[i])});
  EXPECT_LE(worst, 1e-8);
}
