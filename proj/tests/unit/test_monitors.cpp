#include <gtest/gtest.h>

#include <cmath>

#include "rsflow/background.hpp"
#include "rsflow/error.hpp"
#include "rsflow/monitors.hpp"

using namespace rsflow;

// Every check passes (or is indeterminate in the degenerate equality case) on
// the background, and fails on a state crafted to violate it.

namespace {

const BackgroundModel kModel{3, 2.0, 1.0};

std::vector<MonitorFrame> background_frames(const BackgroundModel& model = kModel) {
  const RadialGrid grid(model.r0, 201);
  std::vector<MonitorFrame> out;
  for (double t : {0.5, 1.0}) {
    out.push_back(make_frame(background_state(t, model, grid), model, RhoSpec::zero(), SchemeConfig{}));
  }
  return out;
}

std::vector<TimeSeriesRecord> series(double t_end, double (*vol)(double), double (*sup)(double)) {
  std::vector<TimeSeriesRecord> out;
  for (int k = 0; k <= 100; ++k) {
    TimeSeriesRecord r;
    r.t = t_end * k / 100.0;
    r.volume = vol(r.t);
    r.sup_f1_compact = sup(r.t);
    out.push_back(r);
  }
  return out;
}

std::size_t index_near(const MonitorFrame& f, double r) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < f.node_r.size(); ++i) {
    if (std::abs(f.node_r[i] - r) < std::abs(f.node_r[best] - r)) best = i;
  }
  return best;
}

}  // namespace

TEST(Monitors, BackgroundPassesEveryFrameCheck) {
  const auto frames = background_frames();
  MonitorConfig cfg;
  cfg.enabled = {"ordering",         "monotone_scaling", "lower_barriers",       "s_upper_bound",
                 "algebraic_identity", "radial_identity", "boundary_eta_identity", "convexity"};
  const auto rep = run_monitors(frames, {}, kModel, RhoSpec::zero(), cfg);
  EXPECT_NE(rep.overall(), Verdict::Fail) << rep.to_text();
  // F1 = F2 = 0: ordering holds but strictness cannot be certified
  EXPECT_EQ(rep.find("ordering")->verdict, Verdict::Indeterminate);
  EXPECT_TRUE(rep.find("ordering")->flagged);
  for (const auto& c : rep.checks) {
    if (c.id != "ordering") EXPECT_EQ(c.verdict, Verdict::Pass) << c.id;
  }
}

TEST(Monitors, OrderingFlippedSign) {
  auto frames = background_frames();
  auto& f = frames.back();
  const std::size_t i = index_near(f, 0.4);
  f.fields.F2[i] = 0.5;
  const auto c = check_ordering(frames, 3, MonitorConfig{});
  EXPECT_EQ(c.verdict, Verdict::Fail);
  EXPECT_NEAR(c.worst_r, f.node_r[i], 1e-12);
  EXPECT_DOUBLE_EQ(c.worst_t, 1.0);
  EXPECT_THROW(check_ordering(frames, 2, MonitorConfig{}), Error);
}

TEST(Monitors, MonotoneScalingDecrease) {
  auto frames = background_frames();
  frames.back().metric.a[60] *= 0.95;
  EXPECT_EQ(check_monotone_scaling(frames, kModel, MonitorConfig{}).verdict, Verdict::Fail);
}

TEST(Monitors, LowerBarrierFlatProbe) {
  const RadialGrid grid(1.0, 201);
  RadialMetricState flat;
  flat.grid = grid;
  flat.a.assign(grid.size(), 1.0);
  flat.b = grid.r();
  const std::vector<MonitorFrame> frames = {make_frame(flat, 1.0)};
  const auto c = check_lower_barriers(frames, MonitorConfig{});
  EXPECT_EQ(c.verdict, Verdict::Fail);
  EXPECT_GT(c.worst_r, 0.5);  // sinh s - s grows with s
}

TEST(Monitors, SUpperBoundAtTimeZero) {
  // m = 1, t = 0: s = r, and at r0/2 the bound is ln((e^1.5 - 1)/(e - e^0.5)).
  const RadialGrid grid(1.0, 201);
  const double bound = std::log((std::exp(1.5) - 1.0) / (std::exp(1.0) - std::exp(0.5)));
  EXPECT_NEAR(bound, 1.180270, 1e-6);
  EXPECT_GT(bound, 0.5);
  std::vector<MonitorFrame> frames = {
      make_frame(initial_state(grid, 3, 1.0), {3, 1.0, 1.0}, RhoSpec::zero(), SchemeConfig{})};
  EXPECT_EQ(check_s_upper_bound(frames, MonitorConfig{}).verdict, Verdict::Pass);
  for (auto& s : frames[0].s_ref) s *= 4.0;
  EXPECT_EQ(check_s_upper_bound(frames, MonitorConfig{}).verdict, Verdict::Fail);
}

TEST(Monitors, AlgebraicIdentityTamper) {
  auto frames = background_frames();
  frames[0].fields.F1[30] += 1e-8;
  const auto c = check_algebraic_identity(frames, MonitorConfig{});
  EXPECT_EQ(c.verdict, Verdict::Fail);
  EXPECT_DOUBLE_EQ(c.worst_t, 0.5);
}

TEST(Monitors, RadialIdentitySpike) {
  auto frames = background_frames();
  frames[1].fields.F1[100] += 1e-2;
  EXPECT_EQ(check_radial_identity(frames, 3, MonitorConfig{}).verdict, Verdict::Fail);
  EXPECT_THROW(check_radial_identity(frames, 2, MonitorConfig{}), Error);
}

TEST(Monitors, RadialIdentityConvergesOnSmoothProbe) {
  // F1 != F2 everywhere: b = sinh r (1 + r^2/5), a = 1 + r^2/3.
  std::vector<double> res;
  for (std::size_t pts : {101u, 201u, 401u}) {
    const RadialGrid grid(1.0, pts);
    RadialMetricState s;
    s.grid = grid;
    s.a.resize(pts);
    s.b.resize(pts);
    for (std::size_t i = 0; i < pts; ++i) {
      const double r = grid[i];
      s.a[i] = 1.0 + r * r / 3.0;
      s.b[i] = std::sinh(r) * (1.0 + r * r / 5.0);
    }
    res.push_back(radial_identity_residual(make_frame(s, 1.0)));
  }
  EXPECT_GE(std::log2(res[0] / res[1]), 1.8);
  EXPECT_GE(std::log2(res[1] / res[2]), 1.8);
}

TEST(Monitors, BoundaryIdentityWrongEta) {
  auto frames = background_frames();
  EXPECT_EQ(check_boundary_eta_identity(frames, kModel, RhoSpec::zero(), MonitorConfig{}).verdict,
            Verdict::Pass);
  frames[0].eta *= 1.1;
  const auto c = check_boundary_eta_identity(frames, kModel, RhoSpec::zero(), MonitorConfig{});
  EXPECT_EQ(c.verdict, Verdict::Fail);
  EXPECT_DOUBLE_EQ(c.worst_r, 1.0);
}

TEST(Monitors, BoundaryIdentityBackgroundIsExact) {
  // eta' = eta (n-1)(1 - 1/xi) on the background; F1 = dF2/dn = 0.
  const double t = 0.3;
  const double lhs = background_mean_curvature_derivative(t, kModel);
  const double rhs = background_mean_curvature(t, kModel) * 2.0 * (1.0 - 1.0 / xi(t, kModel));
  EXPECT_NEAR(lhs, rhs, 1e-13);
}

TEST(Monitors, ConvergenceRisingCurvature) {
  const RadialGrid grid(1.0, 201);
  const BackgroundModel model{3, 0.5, 1.0};
  const std::vector<MonitorFrame> frames = {
      make_frame(background_state(10.0, model, grid), model, RhoSpec::zero(), SchemeConfig{})};
  const auto decaying = series(10.0, [](double t) { return 1.0 + t; }, [](double t) { return std::exp(-t); });
  EXPECT_EQ(check_convergence(decaying, frames, MonitorConfig{}).verdict, Verdict::Pass);
  const auto rising = series(10.0, [](double t) { return 1.0 + t; }, [](double t) { return 1e-3 * t; });
  EXPECT_EQ(check_convergence(rising, frames, MonitorConfig{}).verdict, Verdict::Fail);
  const auto short_run = series(4.0, [](double t) { return 1.0 + t; }, [](double t) { return 0.0 * t; });
  EXPECT_THROW(check_convergence(short_run, frames, MonitorConfig{}), Error);
}

TEST(Monitors, VolumeShrinking) {
  const auto growing = series(10.0, [](double t) { return 1.0 + t; }, [](double) { return 0.0; });
  EXPECT_EQ(check_volume_growth(growing, MonitorConfig{}).verdict, Verdict::Pass);
  const auto shrinking = series(10.0, [](double t) { return 20.0 - t; }, [](double) { return 0.0; });
  EXPECT_EQ(check_volume_growth(shrinking, MonitorConfig{}).verdict, Verdict::Fail);
  const auto flat = series(10.0, [](double) { return 5.0; }, [](double) { return 0.0; });
  const auto c = check_volume_growth(flat, MonitorConfig{});
  EXPECT_TRUE(c.flagged);
  EXPECT_EQ(c.verdict, Verdict::Indeterminate);
}

TEST(Monitors, ConvexityDip) {
  const RadialGrid grid(1.0, 201);
  auto s = background_state(0.5, kModel, grid);
  for (std::size_t i = 100; i < 106; ++i) s.b[i] *= 0.5;
  const std::vector<MonitorFrame> frames = {make_frame(s, kModel, RhoSpec::zero(), SchemeConfig{})};
  const auto c = check_convexity(frames, MonitorConfig{});
  EXPECT_EQ(c.verdict, Verdict::Fail);
  EXPECT_NEAR(c.worst_r, 0.5, 0.05);
  EXPECT_EQ(check_convexity(background_frames(), MonitorConfig{}).verdict, Verdict::Pass);
}

TEST(Monitors, ConformalBounds) {
  const BackgroundModel model{2, 2.0, 1.0};
  auto frames = background_frames(model);
  EXPECT_EQ(check_conformal_bounds(frames, 2.0, MonitorConfig{}).verdict, Verdict::Pass);
  frames[0].u_min = -std::log(2.0) - 1e-3;
  EXPECT_EQ(check_conformal_bounds(frames, 2.0, MonitorConfig{}).verdict, Verdict::Fail);
  frames = background_frames(model);
  frames[1].fields.F1[40] = 0.5;
  EXPECT_EQ(check_conformal_bounds(frames, 2.0, MonitorConfig{}).verdict, Verdict::Fail);
}

TEST(Monitors, UnknownCheck) {
  MonitorConfig cfg;
  cfg.enabled = {"ordering", "no_such_check"};
  EXPECT_THROW(run_monitors(background_frames(), {}, kModel, RhoSpec::zero(), cfg), Error);
}

TEST(Monitors, DefaultsSkipTrendChecksOnShortRuns) {
  const auto rep = run_monitors(background_frames(), {}, kModel, RhoSpec::zero(), MonitorConfig{});
  EXPECT_EQ(rep.find("convergence"), nullptr);
  EXPECT_EQ(rep.find("volume_growth"), nullptr);
  EXPECT_NE(rep.find("radial_identity"), nullptr);
  const auto two_d = default_checks(2);
  EXPECT_EQ(std::count(two_d.begin(), two_d.end(), "ordering"), 0);
  EXPECT_EQ(std::count(two_d.begin(), two_d.end(), "conformal_bounds"), 1);
}
