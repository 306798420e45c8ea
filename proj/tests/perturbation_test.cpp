#include <gtest/gtest.h>

#include "support.hpp"

namespace exactpen {
namespace {

using testing::positive_part;
using testing::scalar_problem;

SamplingSchedule deep_schedule() {
  SamplingSchedule s;
  s.shells = 48;
  return s;
}

TEST(PerturbedFamily, PhiLevelInverseDistanceIsPhi) {
  const auto c = corpus::example_1d();
  const auto fam = PerturbedFamily::phi_level(c.problem);
  EXPECT_TRUE(fam.feasible_at(0.0, Point{-1.0}));
  EXPECT_FALSE(fam.feasible_at(0.0, Point{1e-13}));
  EXPECT_TRUE(fam.feasible_at(0.5, Point{0.5}));
  EXPECT_DOUBLE_EQ(fam.inverse_distance(Point{0.75}), 0.75);
}

TEST(OptimalValueFunction, Example1dClosedForm) {
  const auto c = corpus::example_1d();
  const OptimalValueSamples s = optimal_value_function(c.problem, c.problem.region);
  // h(0) is resolved to a few multiples of 1e-6 times the smallest p.
  EXPECT_NEAR(s.h0, 0.0, 4e-6 * s.p_grid.back());
  for (std::size_t i = 0; i < s.p_grid.size(); ++i) {
    const double p = s.p_grid[i];
    EXPECT_NEAR(s.h_vals[i], -(p + 1.0) * (p + 1.0) + 1.0, 1e-6) << "p=" << p;
    EXPECT_NEAR(s.slope_trace[i], -(p + 2.0), 1e-3) << "p=" << p;
  }
  EXPECT_TRUE(s.calm_from_below);
  EXPECT_NEAR(s.modulus_estimate, 2.0, 0.05);
}

TEST(OptimalValueFunction, NonincreasingInP) {
  const auto c = corpus::convex_slater();
  const OptimalValueSamples s = optimal_value_function(c.problem, c.problem.region);
  for (std::size_t i = 1; i < s.h_vals.size(); ++i) EXPECT_GE(s.h_vals[i], s.h_vals[i - 1] - 1e-12);
  for (double v : s.slope_trace) EXPECT_TRUE(std::isfinite(v));
}

TEST(OptimalValueFunction, ZeroObjective) {
  const OptimalValueSamples s = optimal_value_function(testing::zero_objective(), Region::interval(-3.0, 3.0));
  for (double h : s.h_vals) EXPECT_DOUBLE_EQ(h, 0.0);
  for (double v : s.slope_trace) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(OptimalValueFunction, RejectsBadGrid) {
  const auto c = corpus::example_1d();
  const auto fam = PerturbedFamily::phi_level(c.problem);
  const std::vector<double> up{0.1, 0.2};
  EXPECT_THROW(optimal_value_function(c.problem, fam, up, c.problem.region), PreconditionError);
  const std::vector<double> zero{1.0, 0.0};
  EXPECT_THROW(optimal_value_function(c.problem, fam, zero, c.problem.region), PreconditionError);
}

OptimalValueSamples sqrt_samples() {
  OptimalValueSamples s;
  s.p_grid = default_p_grid(47);
  s.h0 = 0.0;
  for (double p : s.p_grid) {
    s.h_vals.push_back(-std::sqrt(p));
    s.slope_trace.push_back(-std::sqrt(p) / p);
  }
  return s;
}

TEST(CheckCalmFromBelow, SquareRootProfile) {
  const OptimalValueSamples s = sqrt_samples();
  EXPECT_FALSE(check_calm_from_below(s, RateModulus::identity()).calm);
  const CalmFromBelow root = check_calm_from_below(s, RateModulus::power(1.0, 0.5));
  EXPECT_TRUE(root.calm);
  EXPECT_NEAR(root.L_estimate, 1.0, 1e-12);
}

TEST(CheckCalmFromBelow, Example1d) {
  const auto c = corpus::example_1d();
  const CalmFromBelow calm =
      check_calm_from_below(optimal_value_function(c.problem, c.problem.region), RateModulus::identity());
  EXPECT_TRUE(calm.calm);
  EXPECT_NEAR(calm.L_estimate, 2.0, 0.05);
}

TEST(CheckCalmFromBelow, RequiresIncreasingModulus) {
  const auto flat = RateModulus::custom([](double) { return 0.0; }, "zero");
  EXPECT_THROW(check_calm_from_below(sqrt_samples(), flat), PreconditionError);
}

TEST(ProblemCalmness, Example1dLinearModulus) {
  const auto c = corpus::example_1d();
  const ProblemCalmness r = check_problem_omega_calmness(c.problem, PerturbedFamily::phi_level(c.problem), Point{0.0},
                                                         RateModulus::identity());
  EXPECT_TRUE(r.calm);
  EXPECT_NEAR(r.a_estimate, 2.0, 0.05);
  EXPECT_GT(r.pairs, 0U);
}

TEST(ProblemCalmness, ObjectiveAboveOptimumGivesZero) {
  const auto p = scalar_problem([](double x) { return x * x; }, positive_part);
  const ProblemCalmness r =
      check_problem_omega_calmness(p, PerturbedFamily::phi_level(p), Point{0.0}, RateModulus::identity());
  EXPECT_TRUE(r.calm);
  EXPECT_DOUBLE_EQ(r.a_estimate, 0.0);
}

TEST(ProblemCalmness, ConstantFamilyAtLocalMinimum) {
  const auto c = corpus::example_1d();
  const ProblemCalmness r = check_problem_omega_calmness(c.problem, PerturbedFamily::constant(c.problem), Point{0.0},
                                                         RateModulus::identity());
  EXPECT_TRUE(r.calm);
  EXPECT_DOUBLE_EQ(r.a_estimate, 0.0);
}

TEST(CrossCheck, Example1dAgrees) {
  const auto c = corpus::example_1d();
  const CalmnessCrossCheck r = cross_check_calmness_vs_exactness(c.problem, Point{0.0});
  EXPECT_TRUE(r.exact_locally);
  EXPECT_TRUE(r.calmness.calm);
  EXPECT_TRUE(r.agree);
  EXPECT_NEAR(r.calmness.a_estimate, r.lambda_bar.value, 0.05);
}

TEST(CrossCheck, ZeroObjective) {
  const CalmnessCrossCheck r = cross_check_calmness_vs_exactness(testing::zero_objective(), Point{0.0});
  EXPECT_TRUE(r.exact_locally);
  EXPECT_TRUE(r.calmness.calm);
  EXPECT_DOUBLE_EQ(r.calmness.a_estimate, 0.0);
}

TEST(CrossCheck, SquareRootBothFail) {
  const auto c = corpus::sqrt_noncalm();
  const CalmnessCrossCheck r = cross_check_calmness_vs_exactness(c.problem, Point{0.0}, deep_schedule());
  EXPECT_FALSE(r.exact_locally);
  EXPECT_FALSE(r.calmness.calm);
  EXPECT_TRUE(r.agree);
}

}  // namespace
}  // namespace exactpen
