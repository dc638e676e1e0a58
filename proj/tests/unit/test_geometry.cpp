#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rsflow/background.hpp"
#include "rsflow/error.hpp"
#include "rsflow/geometry.hpp"

using namespace rsflow;

namespace {

RadialMetricState flat(const RadialGrid& grid, int n) {
  RadialMetricState s;
  s.grid = grid;
  s.n = n;
  s.a.assign(grid.size(), 1.0);
  s.b = grid.r();
  return s;
}

RadialMetricState with_a(const RadialGrid& grid, double (*fa)(double)) {
  RadialMetricState s = flat(grid, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) s.a[i] = fa(grid[i]);
  return s;
}

}  // namespace

TEST(Arclength, UnitIntegrandGivesRadius) {
  const RadialGrid grid(1.0, 101);
  const auto s = arclength(flat(grid, 3));
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_DOUBLE_EQ(s[i], grid[i]);
}

TEST(Arclength, ConstantIntegrand) {
  const RadialGrid grid(1.0, 101);
  const auto s = arclength(with_a(grid, [](double) { return std::sqrt(2.0); }));
  EXPECT_NEAR(s.back(), std::sqrt(2.0), 1e-14);
}

TEST(Arclength, CoshIntegrand) {
  const RadialGrid grid(1.0, 1001);
  const auto s = arclength(with_a(grid, [](double r) { return std::cosh(r); }));
  EXPECT_NEAR(s.back(), std::sinh(1.0), 1e-6);
}

TEST(Arclength, RejectsNonPositiveA) {
  const RadialGrid grid(1.0, 101);
  RadialMetricState s = flat(grid, 3);
  s.a[40] = 0.0;
  try {
    arclength(s);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidState);
  }
}

TEST(Curvature, InitialDataIsHyperbolic) {
  const RadialGrid grid(1.0, 1001);
  for (double m : {0.5, 2.0}) {
    const auto f = curvature(initial_state(grid, 3, m), m);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_NEAR(f.K[i], -1.0 / m, 1e-5) << i;
      EXPECT_NEAR(f.L[i], -1.0 / m, 1e-5) << i;
      EXPECT_NEAR(f.F1[i], 0.0, 1e-5) << i;
      EXPECT_NEAR(f.F2[i], 0.0, 1e-5) << i;
    }
  }
}

TEST(Curvature, ScaledHyperbolic) {
  const RadialGrid grid(1.0, 1001);
  const BackgroundModel model{3, 2.0, 1.0};
  const double t = 0.3;
  const double x = xi(t, model);
  const auto f = curvature(background_state(t, model, grid), x);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(f.K[i], -1.0 / x, 1e-5);
    EXPECT_NEAR(f.L[i], -1.0 / x, 1e-5);
  }
}

TEST(Curvature, FlatProbe) {
  const RadialGrid grid(1.0, 101);
  const auto f = curvature(flat(grid, 3), 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(f.K[i], 0.0, 1e-10);
    EXPECT_NEAR(f.L[i], 0.0, 1e-10);
    EXPECT_NEAR(f.F1[i], 2.0, 1e-10);
    EXPECT_NEAR(f.F2[i], 2.0, 1e-10);
  }
}

TEST(Curvature, AlgebraicIdentityIsExact) {
  const RadialGrid grid(1.0, 201);
  RadialMetricState s = initial_state(grid, 4, 0.7);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s.a[i] *= 1.0 + 0.1 * grid[i] * grid[i];
    s.b[i] *= 1.0 + 0.05 * std::cos(grid[i]);
  }
  const auto f = curvature(s, 0.9);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lhs = f.F1[i] - 3.0 * f.F2[i];
    const double rhs = -3.0 * 2.0 * (f.L[i] + 1.0 / 0.9);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs))) << i;
  }
}

TEST(Curvature, DegenerateB) {
  const RadialGrid grid(1.0, 101);
  RadialMetricState s = flat(grid, 3);
  s.b[10] = -0.1;
  EXPECT_THROW(curvature(s, 1.0), Error);
}

TEST(MeanCurvature, HyperbolicBoundary) {
  const RadialGrid grid(1.0, 1001);
  const double m = 2.0;
  const auto H = mean_curvature(initial_state(grid, 3, m));
  EXPECT_NEAR(H.back(), 2.626070 / std::sqrt(m), 1e-5);
  EXPECT_NEAR(2.0 / std::tanh(1.0), 2.626070, 1e-6);
}

TEST(MeanCurvature, FlatSpheres) {
  const RadialGrid grid(1.0, 101);
  const auto H = mean_curvature(flat(grid, 3));
  for (std::size_t k = 0; k < H.size(); ++k) EXPECT_NEAR(H[k], 2.0 / grid[k + 1], 1e-12);
}

TEST(MeanCurvature, PoleIsUndefined) {
  const RadialGrid grid(1.0, 101);
  try {
    mean_curvature_at(flat(grid, 3), 0);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PoleUndefined);
  }
}

TEST(Volume, HyperbolicBall) {
  const RadialGrid grid(1.0, 1001);
  const double v = volume(initial_state(grid, 3, 1.0));
  EXPECT_NEAR(v, std::numbers::pi * (std::sinh(2.0) - 2.0), 1e-3);
  EXPECT_NEAR(v, 5.1109, 1e-3);
}

TEST(Volume, Homogeneity) {
  const RadialGrid grid(1.0, 201);
  RadialMetricState s = initial_state(grid, 3, 1.0);
  const double v = volume(s);
  for (auto& x : s.a) x *= 1.5;
  for (auto& x : s.b) x *= 1.5;
  EXPECT_NEAR(volume(s), std::pow(1.5, 3) * v, 1e-12 * v);
}

TEST(Volume, UnitDisc) {
  const RadialGrid grid(1.0, 101);
  EXPECT_NEAR(volume(flat(grid, 2)), std::numbers::pi, 1e-12);
}

TEST(ShiftedScalar, Substitutions) {
  CurvatureFields f;
  f.F1 = {0.0, 0.0};
  f.F2 = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(shifted_scalar_curvature(f, 1.0, 3)[0], 0.0);
  EXPECT_DOUBLE_EQ(shifted_scalar_curvature(f, 2.0, 3)[1], 3.0);
  // initial data: xi(0) = m
  EXPECT_DOUBLE_EQ(shifted_scalar_curvature(f, 2.0, 3)[0], 3.0 * 2.0 * (1.0 - 1.0 / 2.0));
}

TEST(Curvature, SecondOrderUnderRefinement) {
  // a = 1 + r^2/4 and b = sinh r in closed form; K and L from the definitions.
  auto exact = [](double r, double& K, double& L) {
    const double a = 1.0 + 0.25 * r * r, a_r = 0.5 * r;
    const double b = std::sinh(r), b_r = std::cosh(r), b_rr = std::sinh(r);
    const double b_s = b_r / a;
    const double b_ss = (b_rr - a_r * b_r / a) / (a * a);
    K = -b_ss / b;
    L = (1.0 - b_s * b_s) / (b * b);
  };
  std::vector<double> errors;
  for (std::size_t pts : {101u, 201u, 401u, 801u}) {
    const RadialGrid grid(1.0, pts);
    RadialMetricState s = flat(grid, 3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      s.a[i] = 1.0 + 0.25 * grid[i] * grid[i];
      s.b[i] = std::sinh(grid[i]);
    }
    const auto f = curvature(s, 1.0);
    double err = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      double K, L;
      exact(grid[i], K, L);
      err = std::max({err, std::abs(f.K[i] - K), std::abs(f.L[i] - L)});
    }
    errors.push_back(err);
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double p = std::log2(errors[k - 1] / errors[k]);
    EXPECT_GE(p, 1.8);
    EXPECT_LE(p, 2.2);
  }
}
