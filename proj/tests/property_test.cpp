#include <gtest/gtest.h>

#include "support.hpp"

namespace exactpen {
namespace {

using testing::positive_part;

const std::vector<double> kLambdas{0.0, 0.5, 1.0, 2.5, 7.0, 20.0};

// Instances of dimension at most two; the l2 families are truncated to N = 2.
std::vector<corpus::CorpusInstance> small_instances() {
  std::vector<corpus::CorpusInstance> out;
  for (const std::string& id : corpus::ids())
    out.push_back(corpus::load(id, id.rfind("l2_", 0) == 0 ? corpus::Params{{"N", 2}} : corpus::Params{}));
  return out;
}

TEST(Property, PenalizedValueIsMonotoneInLambda) {
  for (const auto& c : small_instances()) {
    for (const Point& x : sample_cloud(c.problem.region, 400, 11)) {
      double prev = -std::numeric_limits<double>::infinity();
      for (double lambda : kLambdas) {
        const double v = PenaltyFunction(c.problem, lambda)(x).value();
        EXPECT_GE(v, prev) << c.id;
        prev = v;
      }
    }
  }
}

TEST(Property, LambdaBarScalesWithObjective) {
  const auto base = corpus::example_1d().problem;
  const double ref = estimate_lambda_bar(base, Point{0.0}).value;
  for (double s : {0.25, 3.0, 10.0}) {
    ConstrainedProblem scaled_f = base;
    scaled_f.objective = [f = base.objective, s](std::span<const double> x) { return ExtReal(s * f(x).value()); };
    EXPECT_NEAR(estimate_lambda_bar(scaled_f, Point{0.0}).value, s * ref, 1e-9 * s * ref) << "s=" << s;

    ConstrainedProblem scaled_phi = base;
    scaled_phi.penalty_term = [phi = base.penalty_term, s](std::span<const double> x) { return s * phi(x); };
    EXPECT_NEAR(estimate_lambda_bar(scaled_phi, Point{0.0}).value, ref / s, 1e-9 * ref / s) << "s=" << s;
  }
}

TEST(Property, PenaltyPathIsMonotone) {
  const std::vector<double> ladder{0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0};
  for (const auto& c : small_instances()) {
    const PenaltyPath path = build_penalty_path(c.problem, ladder, c.problem.region);
    for (std::size_t i = 1; i < path.rungs.size(); ++i) {
      const Rung& a = path.rungs[i - 1];
      const Rung& b = path.rungs[i];
      EXPECT_LE(b.phi_val, a.phi_val + 1e-6) << c.id << " rung " << i;
      EXPECT_GE(b.f_val, a.f_val - 1e-6) << c.id << " rung " << i;
      EXPECT_GE(b.penalized, a.penalized - 1e-6) << c.id << " rung " << i;
    }
  }
}

TEST(Property, StrongSlopeIsPositivePartOfNegatedRate) {
  const auto c = corpus::example_1d();
  for (double lambda : {0.0, 1.0, 3.0, 10.0}) {
    const PenaltyFunction F(c.problem, lambda);
    for (double t : {-2.0, -0.5, 0.0, 0.25, 0.5, 1.0, 2.5}) {
      const DescentEstimate d = rate_of_steepest_descent(F, Point{t});
      EXPECT_DOUBLE_EQ(d.strong_slope, std::max(-d.rate, 0.0)) << "lambda=" << lambda << " x=" << t;
    }
  }
  const auto cs = corpus::convex_slater();
  for (const Point& x : sample_cloud(cs.problem.region, 32, 4)) {
    const DescentEstimate d = rate_of_steepest_descent(PenaltyFunction(cs.problem, 2.0), x);
    EXPECT_DOUBLE_EQ(d.strong_slope, std::max(-d.rate, 0.0));
  }
}

// Dense grid followed by three zooms onto the best cell.
double grid_oracle(const ConstrainedProblem& p, double lambda, const Region& region) {
  const std::size_t n = region.dim();
  const std::size_t per_axis = n == 1 ? 400001 : 801;
  const PenaltyFunction F(p, lambda);
  Point lo = region.lower();
  Point hi = region.upper();
  double best = std::numeric_limits<double>::infinity();
  Point arg = region.center();
  for (int level = 0; level < 4; ++level) {
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = (hi[i] - lo[i]) / static_cast<double>(per_axis - 1);
    const std::size_t total = n == 1 ? per_axis : per_axis * per_axis;
    Point x(n);
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t rem = k;
      for (std::size_t i = n; i-- > 0;) {
        x[i] = lo[i] + h[i] * static_cast<double>(rem % per_axis);
        rem /= per_axis;
      }
      if (!p.in_ambient(x)) continue;
      const ExtReal v = F(x);
      if (v.is_finite() && v.value() < best) {
        best = v.value();
        arg = x;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::max(region.lower()[i], arg[i] - 2.0 * h[i]);
      hi[i] = std::min(region.upper()[i], arg[i] + 2.0 * h[i]);
    }
  }
  return best;
}

TEST(Property, SolveGMatchesDenseGridOracle) {
  for (const auto& c : small_instances()) {
    for (double lambda : {1.0, 2.5, 7.0}) {
      const Rung r = solve_G(c.problem, lambda, c.problem.region);
      const double oracle = grid_oracle(c.problem, lambda, c.problem.region);
      EXPECT_NEAR(r.penalized, oracle, 1e-4) << c.id << " lambda=" << lambda;
    }
  }
}

TEST(Property, SolveGIsNeverWorseThanSampling) {
  const auto p = testing::scalar_problem([](double x) { return std::sin(5.0 * x) + 0.1 * x * x; }, positive_part);
  for (double lambda : {0.0, 0.3, 2.0}) {
    const Rung r = solve_G(p, lambda, p.region);
    for (const Point& x : sample_cloud(p.region, 2048, 9))
      EXPECT_LE(r.penalized, PenaltyFunction(p, lambda)(x).value() + 1e-9);
  }
}

}  // namespace
}  // namespace exactpen
