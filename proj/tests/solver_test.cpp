#include <gtest/gtest.h>

#include "support.hpp"

namespace exactpen {
namespace {

using testing::positive_part;
using testing::scalar_problem;

TEST(Solve, Example1dOnDefaultRegion) {
  const auto c = corpus::example_1d();
  const SolveResult r = solve(c.problem);
  EXPECT_EQ(r.status, SolveStatus::solved);
  EXPECT_NEAR(r.x[0], 0.0, 1e-6);
  EXPECT_NEAR(r.f_val, 0.0, 1e-6);
  EXPECT_GE(r.lambda_final, 5.0);
}

TEST(Solve, StairsMarchesRight) {
  const auto c = corpus::stairs();
  SolverConfig cfg;
  cfg.region = Region::interval(-1.0, 500.0);
  const SolveResult r = solve(c.problem, cfg);
  EXPECT_EQ(r.status, SolveStatus::not_exact_suspected);
  ASSERT_GE(r.path.rungs.size(), 3U);
  for (std::size_t i = 1; i < r.path.rungs.size(); ++i) EXPECT_GT(r.path.rungs[i].x[0], r.path.rungs[i - 1].x[0]);
  EXPECT_GT(r.phi_val, 0.0);
}

TEST(Solve, ConvexSlaterMatchesGridOptimum) {
  const auto c = corpus::convex_slater();
  const SolveResult r = solve(c.problem);
  EXPECT_EQ(r.status, SolveStatus::solved);
  // Dense grid over the feasible half x1 <= 0 of [-3, 3]^2.
  double best = std::numeric_limits<double>::infinity();
  Point arg{0.0, 0.0};
  for (int i = 0; i <= 600; ++i)
    for (int j = 0; j <= 1200; ++j) {
      const Point x{-3.0 + 3.0 * i / 600.0, -3.0 + 6.0 * j / 1200.0};
      const double v = c.problem.f(x).value();
      if (v < best) {
        best = v;
        arg = x;
      }
    }
  EXPECT_NEAR(r.x[0], arg[0], 1e-4);
  EXPECT_NEAR(r.x[1], arg[1], 1e-4);
  EXPECT_NEAR(r.f_val, best, 1e-6);
}

TEST(Solve, ExplicitStartingParameter) {
  const auto c = corpus::example_1d();
  SolverConfig cfg;
  cfg.lambda0 = 0.5;
  const SolveResult r = solve(c.problem, cfg);
  EXPECT_EQ(r.status, SolveStatus::solved);
  EXPECT_DOUBLE_EQ(r.path.rungs.front().lambda, 0.5);
  for (std::size_t i = 1; i < r.path.rungs.size(); ++i)
    EXPECT_GT(r.path.rungs[i].lambda, r.path.rungs[i - 1].lambda);
}

TEST(Solve, InfeasibleRegionThrows) {
  const auto c = corpus::example_1d();
  SolverConfig cfg;
  cfg.region = Region::interval(1.0, 3.0);
  EXPECT_THROW(solve(c.problem, cfg), InfeasibleRegionError);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  cfg.ladder_factor = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigurationError);
  cfg = SolverConfig{};
  cfg.lambda0 = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigurationError);
  cfg = SolverConfig{};
  cfg.max_rungs = 0;
  EXPECT_THROW(cfg.validate(), ConfigurationError);
  cfg = SolverConfig{};
  cfg.feas_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigurationError);
}

TEST(AutoLambda0, Example1d) {
  const auto c = corpus::example_1d();
  EXPECT_NEAR(auto_lambda0(c.problem, c.problem.region), 3.0, 0.1);
}

TEST(AutoLambda0, Fallbacks) {
  EXPECT_DOUBLE_EQ(auto_lambda0(testing::zero_objective(), Region::interval(-3.0, 3.0)), 1.0);
  auto p = scalar_problem([](double x) { return x; }, positive_part);
  p.ambient = [](std::span<const double> x) { return x[0] <= 0.0; };
  EXPECT_DOUBLE_EQ(auto_lambda0(p, p.region), 1.0);
}

}  // namespace
}  // namespace exactpen
