#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"

namespace exactpen {
namespace {

using testing::positive_part;
using testing::scalar_problem;

TEST(ExtReal, RejectsMinusInfinityAndNaN) {
  EXPECT_THROW(ExtReal(-std::numeric_limits<double>::infinity()), PreconditionError);
  EXPECT_THROW(ExtReal(std::nan("")), PreconditionError);
  EXPECT_NO_THROW(ExtReal::infinity());
}

TEST(ExtReal, AdditionAbsorbsInfinity) {
  EXPECT_EQ((ExtReal(1.5) + ExtReal(2.0)).value(), 3.5);
  EXPECT_TRUE((ExtReal(1.0) + ExtReal::infinity()).is_infinite());
  EXPECT_TRUE(ExtReal(7.0) < ExtReal::infinity());
}

TEST(Region, BoxRejectsInvertedBounds) {
  EXPECT_THROW(Region::interval(1.0, 0.0), ConfigurationError);
  EXPECT_THROW(Region::box({0.0}, {1.0, 2.0}), DimensionError);
  EXPECT_THROW(Region::ball({0.0}, 0.0), ConfigurationError);
}

TEST(Region, ContainsProjectAndScale) {
  const Region box = Region::cube(2, -1.0, 1.0);
  EXPECT_TRUE(box.contains(Point{0.5, -1.0}));
  EXPECT_FALSE(box.contains(Point{1.5, 0.0}));
  EXPECT_EQ(box.project({3.0, -4.0}), (Point{1.0, -1.0}));
  const Region big = box.scaled(10.0);
  EXPECT_DOUBLE_EQ(big.upper()[0], 10.0);

  const Region ball = Region::ball({0.0, 0.0}, 1.0);
  EXPECT_FALSE(ball.contains(Point{0.9, 0.9}));
  const Point p = ball.project({3.0, 4.0});
  EXPECT_NEAR(norm(p), 1.0, 1e-12);
}

TEST(Region, SampleCloudIsDeterministic) {
  const Region r = Region::cube(5, -1.0, 1.0);
  EXPECT_EQ(sample_cloud(r, 64, 7), sample_cloud(r, 64, 7));
  EXPECT_NE(sample_cloud(r, 64, 7), sample_cloud(r, 64, 8));
}

TEST(ConstrainedProblem, RejectsNegativePenalty) {
  const auto p = scalar_problem([](double x) { return x; }, [](double x) { return x; });
  EXPECT_THROW(static_cast<void>(p.phi(Point{-1.0})), PreconditionError);
  EXPECT_THROW(p.check_point(Point{0.0, 0.0}), DimensionError);
}

TEST(EvalPenalized, Example1dAtLambdaTwo) {
  const auto c = corpus::example_1d();
  // (-(1+1)^2 + 1) + 2 * 1
  EXPECT_DOUBLE_EQ(eval_penalized(PenaltyFunction(c.problem, 2.0), Point{1.0}).value(), -1.0);
  EXPECT_DOUBLE_EQ(eval_penalized(PenaltyFunction(c.problem, 0.0), Point{-1.0}).value(), 1.0);
}

TEST(EvalPenalized, FeasiblePointGivesObjective) {
  const auto c = corpus::example_1d();
  for (double lambda : {0.0, 1.0, 1e6})
    EXPECT_DOUBLE_EQ(eval_penalized(PenaltyFunction(c.problem, lambda), Point{-2.0}).value(), 2.0);
}

TEST(EvalPenalized, ChecksDimensionAndLambda) {
  const auto c = corpus::example_1d();
  EXPECT_THROW(eval_penalized(PenaltyFunction(c.problem, 1.0), Point{0.0, 0.0}), DimensionError);
  EXPECT_THROW(PenaltyFunction(c.problem, -1.0), PreconditionError);
}

TEST(EvalPenalized, InfiniteObjectiveStaysInfinite) {
  ConstrainedProblem p(
      1, [](std::span<const double> x) { return x[0] < 0.0 ? ExtReal::infinity() : ExtReal(x[0]); },
      [](std::span<const double> x) { return positive_part(x[0]); }, Region::interval(-1.0, 1.0));
  EXPECT_TRUE(eval_penalized(PenaltyFunction(p, 3.0), Point{-0.5}).is_infinite());
}

NlpModel scalar_model(Region region = Region::interval(-5.0, 5.0)) {
  return NlpModel(1, [](std::span<const double> x) { return x[0]; }, std::move(region));
}

TEST(BuildL1Penalty, SumsViolations) {
  NlpModel m = scalar_model();
  m.inequalities.emplace_back([](std::span<const double> x) { return x[0]; });
  EXPECT_DOUBLE_EQ(build_l1_penalty(m).phi(Point{2.0}), 2.0);

  NlpModel feasible = scalar_model();
  feasible.equalities.emplace_back([](std::span<const double> x) { return x[0] - 1.0; });
  feasible.inequalities.emplace_back([](std::span<const double> x) { return -x[0]; });
  EXPECT_DOUBLE_EQ(build_l1_penalty(feasible).phi(Point{1.0}), 0.0);

  NlpModel both = scalar_model();
  both.equalities.emplace_back([](std::span<const double> x) { return x[0] * x[0]; });
  both.inequalities.emplace_back([](std::span<const double> x) { return x[0] - 1.0; });
  EXPECT_DOUBLE_EQ(build_l1_penalty(both).phi(Point{2.0}), 5.0);
}

TEST(BuildL1Penalty, NeedsAConstraint) {
  EXPECT_THROW(build_l1_penalty(scalar_model()), ConfigurationError);
}

TEST(BuildMaxPenalty, TakesLargestViolation) {
  NlpModel m = scalar_model();
  m.inequalities.emplace_back([](std::span<const double> x) { return x[0]; });
  m.inequalities.emplace_back([](std::span<const double> x) { return 2.0 * x[0]; });
  const ConstrainedProblem p = build_max_penalty(m);
  EXPECT_DOUBLE_EQ(p.phi(Point{1.0}), 2.0);
  EXPECT_DOUBLE_EQ(p.phi(Point{-1.0}), 0.0);

  NlpModel eq = scalar_model();
  eq.equalities.emplace_back([](std::span<const double> x) { return x[0]; });
  EXPECT_DOUBLE_EQ(build_max_penalty(eq).phi(Point{-3.0}), 3.0);
}

TEST(BuildDistancePenalty, ComposesModulusWithDistance) {
  auto p = scalar_problem([](double x) { return x; }, positive_part);
  p.feasible_distance = [](std::span<const double> x) { return positive_part(x[0]); };
  EXPECT_DOUBLE_EQ(build_distance_penalty(p, RateModulus::identity()).phi(Point{3.0}), 3.0);
  const auto squared = build_distance_penalty(p, RateModulus::power(1.0, 2.0));
  EXPECT_DOUBLE_EQ(squared.phi(Point{2.0}), 4.0);
  EXPECT_DOUBLE_EQ(squared.phi(Point{-2.0}), 0.0);
}

TEST(BuildDistancePenalty, RequiresOracle) {
  const auto p = scalar_problem([](double x) { return x; }, positive_part);
  EXPECT_THROW(build_distance_penalty(p, RateModulus::identity()), ConfigurationError);
}

TEST(FeasibleDistance, SampledCloudApproximatesDistance) {
  const auto p = scalar_problem([](double x) { return x; }, positive_part);
  const FeasibleDistance d(p);
  EXPECT_TRUE(d.approximate());
  EXPECT_NEAR(d(Point{2.0}), 2.0, 1e-2);
  EXPECT_DOUBLE_EQ(d(Point{-1.0}), 0.0);
}

TEST(RateModulus, Shapes) {
  EXPECT_DOUBLE_EQ(RateModulus::linear(3.0)(2.0), 6.0);
  EXPECT_DOUBLE_EQ(RateModulus::power(2.0, 0.5)(4.0), 4.0);
  const RateModulus t = RateModulus::table({{1.0, 2.0}, {2.0, 3.0}});
  EXPECT_DOUBLE_EQ(t(0.5), 1.0);
  EXPECT_DOUBLE_EQ(t(3.0), 4.0);
  EXPECT_THROW(RateModulus::custom([](double t) { return t + 1.0; }), ConfigurationError);
  EXPECT_THROW(RateModulus::identity()(-1.0), PreconditionError);
}

TEST(SamplingSchedule, Validation) {
  SamplingSchedule s;
  EXPECT_NO_THROW(s.validate());
  s.decay = 1.0;
  EXPECT_THROW(s.validate(), ConfigurationError);
  s = SamplingSchedule{};
  s.shells = 2;
  EXPECT_THROW(s.validate(), ConfigurationError);
  s = SamplingSchedule{};
  EXPECT_DOUBLE_EQ(s.radius(3), 0.125);
  EXPECT_EQ(s.tail_size(), 7);
}

TEST(Expression, ArithmeticAndPrecedence) {
  const Point x{2.0, 3.0};
  EXPECT_DOUBLE_EQ(Expression("x1 + x2 * 2", 2)(x), 8.0);
  EXPECT_DOUBLE_EQ(Expression("(x1 + x2) * 2", 2)(x), 10.0);
  EXPECT_DOUBLE_EQ(Expression("-x1^2", 2)(x), -4.0);
  EXPECT_DOUBLE_EQ(Expression("2^3^2", 2)(x), 512.0);
  EXPECT_DOUBLE_EQ(Expression("x2 / x1 - 1e-1", 2)(x), 1.4);
}

TEST(Expression, Functions) {
  const Point x{-2.0, 3.0};
  EXPECT_DOUBLE_EQ(Expression("abs(x1)", 2)(x), 2.0);
  EXPECT_DOUBLE_EQ(Expression("max(x1, x2, 1)", 2)(x), 3.0);
  EXPECT_DOUBLE_EQ(Expression("min(x1, x2)", 2)(x), -2.0);
  EXPECT_DOUBLE_EQ(Expression("exp(0)", 2)(x), 1.0);
}

TEST(Expression, Errors) {
  EXPECT_THROW(Expression("x3", 2), ConfigurationError);
  EXPECT_THROW(Expression("x1 +", 1), ConfigurationError);
  EXPECT_THROW(Expression("sin(x1)", 1), ConfigurationError);
  EXPECT_THROW(Expression("max(x1)", 1), ConfigurationError);
  EXPECT_THROW(Expression("(x1", 1), ConfigurationError);
  EXPECT_THROW(Expression("x1 x1", 1), ConfigurationError);
  EXPECT_THROW(Expression("x1", 1)(Point{1.0, 2.0}), DimensionError);
}

TEST(Minimize, FindsGlobalMinimumOfDoubleWell) {
  auto g = [](std::span<const double> x) { return ExtReal(std::pow(x[0] * x[0] - 1.0, 2) + 0.1 * x[0]); };
  const MinimizeResult r = minimize(g, Region::interval(-2.0, 2.0), {}, MinimizeOptions{});
  ASSERT_TRUE(r.found);
  EXPECT_NEAR(r.x[0], testing::grid_argmin([](double t) { return std::pow(t * t - 1.0, 2) + 0.1 * t; }, -2, 2), 1e-4);
}

TEST(Minimize, ReportsNothingWhenEverythingIsInfinite) {
  auto g = [](std::span<const double>) { return ExtReal::infinity(); };
  EXPECT_FALSE(minimize(g, Region::interval(0.0, 1.0), {}, MinimizeOptions{}).found);
}

}  // namespace
}  // namespace exactpen
