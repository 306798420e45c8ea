#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/global_analysis.hpp"
#include "exactpen/local_analysis.hpp"
#include "exactpen/minimizer.hpp"
#include "exactpen/problem.hpp"
#include "exactpen/schedule.hpp"

namespace exactpen {

struct SolverConfig {
  /// nullopt selects auto_lambda0.
  std::optional<double> lambda0;
  double ladder_factor = 2.0;
  int max_rungs = 25;
  double feas_tol = 1e-8;
  /// nullopt selects the problem's default region.
  std::optional<Region> region;
  MinimizeOptions inner;
  std::uint64_t seed = 0;
  SamplingSchedule schedule = SamplingSchedule::local_default();

  void validate() const {
    if (lambda0 && !(*lambda0 >= 0.0)) throw ConfigurationError("SolverConfig: lambda0 must be >= 0");
    if (!(ladder_factor > 1.0)) throw ConfigurationError("SolverConfig: ladder_factor must exceed 1");
    if (!(feas_tol > 0.0)) throw ConfigurationError("SolverConfig: feas_tol must be positive");
    if (max_rungs < 1) throw ConfigurationError("SolverConfig: max_rungs must be >= 1");
  }
};

enum class SolveStatus { solved, not_exact_suspected };

inline const char* to_string(SolveStatus s) { return s == SolveStatus::solved ? "solved" : "not_exact_suspected"; }

struct SolveResult {
  Point x;
  double f_val = 0.0;
  double phi_val = 0.0;
  double lambda_final = 0.0;
  PenaltyPath path{{}, std::nullopt, Region::interval(0.0, 1.0)};
  SolveStatus status = SolveStatus::not_exact_suspected;
};

/// 1.5 times the largest least local parameter over up to five distinct
/// near-optimal feasible points; 1.0 when every estimate is 0 or missing.
inline double auto_lambda0(const ConstrainedProblem& problem, const Region& region,
                           const SamplingSchedule& schedule = SamplingSchedule::local_default(),
                           MinimizeOptions inner = {}) {
  auto restricted = [&](std::span<const double> x) -> ExtReal {
    if (problem.phi(x) > kZeroPenaltyTol) return ExtReal::infinity();
    return problem.f(x);
  };
  const MinimizeResult best = minimize(restricted, region, problem.ambient, inner);
  if (!best.found) return 1.0;

  std::vector<Point> points{best.x};
  const double f_best = best.value.value();
  const double slack = 1e-3 * std::max(1.0, std::abs(f_best));
  for (const Point& x : sample_cloud(region, 4096, inner.seed)) {
    if (points.size() >= 5) break;
    if (!problem.in_ambient(x) || problem.phi(x) > kZeroPenaltyTol) continue;
    const ExtReal fx = problem.f(x);
    if (fx.is_infinite() || fx.value() > f_best + slack) continue;
    const bool distinct = std::all_of(points.begin(), points.end(),
                                      [&](const Point& p) { return distance(p, x, problem.norm) > 1e-3; });
    if (distinct) points.push_back(x);
  }

  double worst = 0.0;
  for (const Point& x : points) {
    try {
      if (const auto lam = least_local_parameter(estimate_lambda_bar(problem, x, schedule)))
        worst = std::max(worst, *lam);
    } catch (const PreconditionError&) {
    }
  }
  return worst > 0.0 ? 1.5 * worst : 1.0;
}

/// Adaptive exact-penalty method on the region: λ grows by
/// λ <- max(factor λ, λ + 1) with warm starts until a feasible rung is
/// confirmed by an equal penalized value at the next rung.
inline SolveResult solve(const ConstrainedProblem& problem, const SolverConfig& config = {}) {
  config.validate();
  const Region region = config.region.value_or(problem.region);
  MinimizeOptions inner = config.inner;
  inner.seed = config.seed;
  SamplingSchedule sched = config.schedule;
  sched.seed = config.seed;

  double lambda = config.lambda0 ? *config.lambda0 : auto_lambda0(problem, region, sched, inner);
  SolveResult out;
  out.path = PenaltyPath{{}, problem.fstar_hint, region};

  std::optional<FeasibleDistance> dist;
  try {
    dist.emplace(problem, region, config.seed);
  } catch (const ConfigurationError&) {
  }

  const std::vector<Point> user_warm = inner.warm_starts;
  auto finish = [&](const Rung& r, SolveStatus status) {
    out.x = r.x;
    out.f_val = r.f_val;
    out.phi_val = r.phi_val;
    out.lambda_final = out.path.rungs.back().lambda;
    out.status = status;
    return out;
  };

  for (int k = 0; k < config.max_rungs; ++k) {
    inner.warm_starts = user_warm;
    if (!out.path.rungs.empty()) inner.warm_starts.push_back(out.path.rungs.back().x);
    out.path.rungs.push_back(solve_G(problem, lambda, region, inner));
    const auto& rungs = out.path.rungs;
    if (rungs.size() >= 2) {
      const Rung& prev = rungs[rungs.size() - 2];
      if (prev.phi_val <= config.feas_tol && std::abs(rungs.back().penalized - prev.penalized) <= 1e-6)
        return finish(prev, SolveStatus::solved);
    }
    if (dist && detect_escape(out.path, *dist, config.feas_tol)) return finish(rungs.back(), SolveStatus::not_exact_suspected);
    lambda = std::max(config.ladder_factor * lambda, lambda + 1.0);
  }

  const auto& rungs = out.path.rungs;
  const bool any_feasible =
      std::any_of(rungs.begin(), rungs.end(), [&](const Rung& r) { return r.phi_val <= config.feas_tol; });
  // The f* hint says nothing about this region, so search it directly.
  ConstrainedProblem unhinted = problem;
  unhinted.fstar_hint.reset();
  if (!any_feasible && !compute_fstar(unhinted, region, inner))
    throw InfeasibleRegionError("solve: no feasible point found in " + region.describe());
  return finish(rungs.back(), SolveStatus::not_exact_suspected);
}

}  // namespace exactpen
