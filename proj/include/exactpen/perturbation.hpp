#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/local_analysis.hpp"
#include "exactpen/minimizer.hpp"
#include "exactpen/modulus.hpp"
#include "exactpen/problem.hpp"
#include "exactpen/schedule.hpp"

namespace exactpen {

/// Scalar perturbation Ω(p), p >= 0, of the feasible set with base p* = 0.
struct PerturbedFamily {
  std::function<bool(double, std::span<const double>)> feasible_at;
  /// d(p*, Ω^{-1}(x)); empty when unknown.
  std::function<double(std::span<const double>)> inverse_distance;
  std::string name;

  /// Ω(p) = {x ∈ A : φ(x) <= p}. Ω^{-1}(x) = [φ(x), ∞), so the inverse
  /// distance is φ itself. The comparison is exact: any tolerance would
  /// swamp the tiny p values used for calmness checks.
  static PerturbedFamily phi_level(const ConstrainedProblem& problem) {
    PerturbedFamily fam;
    fam.feasible_at = [problem](double p, std::span<const double> x) {
      return problem.in_ambient(x) && problem.phi(x) <= p;
    };
    fam.inverse_distance = [problem](std::span<const double> x) { return problem.phi(x); };
    fam.name = "phi_level";
    return fam;
  }

  /// Ω(p) ≡ Ω for every p.
  static PerturbedFamily constant(const ConstrainedProblem& problem) {
    PerturbedFamily fam;
    fam.feasible_at = [problem](double, std::span<const double> x) {
      return problem.in_ambient(x) && problem.phi(x) == 0.0;
    };
    fam.name = "constant";
    return fam;
  }
};

/// p_j = 2^-j for j = 0..last.
inline std::vector<double> default_p_grid(int last = 20) {
  std::vector<double> g;
  for (int j = 0; j <= last; ++j) g.push_back(std::ldexp(1.0, -j));
  return g;
}

struct OptimalValueSamples {
  std::vector<double> p_grid;
  /// +inf where Ω(p) ∩ region looked empty.
  std::vector<double> h_vals;
  std::vector<double> slope_trace;
  double h0 = 0.0;
  std::vector<Point> minimizers;
  bool calm_from_below = false;
  double modulus_estimate = 0.0;
};

namespace detail {

// Largest t in [0, 1] with from + t (to - from) in Ω(p), given `from` inside.
inline Point pull_into(const PerturbedFamily& family, double p, const Point& from, const Point& to) {
  if (family.feasible_at(p, to)) return to;
  double lo = 0.0, hi = 1.0;
  Point y(from.size());
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = from[i] + mid * (to[i] - from[i]);
    (family.feasible_at(p, y) ? lo : hi) = mid;
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = from[i] + lo * (to[i] - from[i]);
  return y;
}

inline double tail_inf(std::span<const double> values) {
  const std::size_t tail = (values.size() + 2) / 3;
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t j = values.size() - tail; j < values.size(); ++j) inf = std::min(inf, values[j]);
  return inf;
}

}  // namespace detail

/// h(p) = inf{f(x) : x ∈ Ω(p) ∩ region} on a decreasing grid, plus h(0).
/// Each solve is warm-started from the previous minimizer pulled back into
/// the smaller feasible set.
inline OptimalValueSamples optimal_value_function(const ConstrainedProblem& problem, const PerturbedFamily& family,
                                                  std::span<const double> p_grid, const Region& region,
                                                  MinimizeOptions options = {}) {
  if (p_grid.empty()) throw PreconditionError("optimal_value_function: empty p grid");
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (!(p_grid[i] > 0.0)) throw PreconditionError("optimal_value_function: p grid must be positive");
    if (i > 0 && !(p_grid[i] < p_grid[i - 1]))
      throw PreconditionError("optimal_value_function: p grid must be strictly decreasing");
  }
  if (region.dim() != problem.dim) throw DimensionError("optimal_value_function: region dimension mismatch");

  auto solve_at = [&](double p, const MinimizeOptions& opts) {
    auto restricted = [&](std::span<const double> x) -> ExtReal {
      if (!family.feasible_at(p, x)) return ExtReal::infinity();
      return problem.f(x);
    };
    return minimize(restricted, region, problem.ambient, opts);
  };

  OptimalValueSamples out;
  out.p_grid.assign(p_grid.begin(), p_grid.end());
  const std::vector<Point> user_warm = options.warm_starts;
  const double user_min_step = options.min_step;
  // h(0) errors are divided by the smallest p, so resolve it at that scale.
  options.min_step = std::min(user_min_step, 1e-6 * p_grid.back());
  const MinimizeResult base = solve_at(0.0, options);
  if (!base.found) throw InfeasibleRegionError("optimal_value_function: Ω(0) ∩ region looks empty");
  out.h0 = base.value.value();

  std::optional<Point> prev;
  for (double p : p_grid) {
    options.min_step = std::min(user_min_step, 1e-6 * p);
    options.warm_starts = user_warm;
    options.warm_starts.push_back(base.x);
    if (prev) options.warm_starts.push_back(detail::pull_into(family, p, base.x, *prev));
    const MinimizeResult r = solve_at(p, options);
    if (!r.found) {
      out.h_vals.push_back(std::numeric_limits<double>::infinity());
      out.slope_trace.push_back(std::numeric_limits<double>::infinity());
      out.minimizers.emplace_back();
      continue;
    }
    // Ω(0) ⊂ Ω(p), so h(p) <= h(0) whatever the local search found.
    const double h = std::min(r.value.value(), out.h0);
    out.h_vals.push_back(h);
    out.slope_trace.push_back((h - out.h0) / p);
    out.minimizers.push_back(h < r.value.value() ? base.x : r.x);
    prev = out.minimizers.back();
  }
  const double inf = detail::tail_inf(out.slope_trace);
  out.calm_from_below = inf > -kDivergenceThreshold;
  out.modulus_estimate = std::max(0.0, -inf);
  return out;
}

inline OptimalValueSamples optimal_value_function(const ConstrainedProblem& problem, const Region& region,
                                                  MinimizeOptions options = {}) {
  const std::vector<double> grid = default_p_grid();
  return optimal_value_function(problem, PerturbedFamily::phi_level(problem), grid, region, std::move(options));
}

struct CalmFromBelow {
  bool calm = false;
  double L_estimate = 0.0;
};

/// Calm from below iff inf over the tail grid of (h(p) - h(0)) / ω(p) > -1e6.
inline CalmFromBelow check_calm_from_below(const OptimalValueSamples& samples, const RateModulus& omega) {
  if (!std::isfinite(samples.h0)) throw PreconditionError("check_calm_from_below: h(0) is infinite");
  if (!omega.strictly_increasing_on(samples.p_grid))
    throw PreconditionError("check_calm_from_below: omega must be strictly increasing");
  std::vector<double> ratios;
  for (std::size_t i = 0; i < samples.p_grid.size(); ++i)
    ratios.push_back((samples.h_vals[i] - samples.h0) / omega(samples.p_grid[i]));
  const std::size_t tail = (ratios.size() + 2) / 3;
  for (std::size_t j = ratios.size() - tail; j < ratios.size(); ++j)
    if (!std::isfinite(ratios[j])) throw PreconditionError("check_calm_from_below: h is not finite on the tail grid");
  const double inf = detail::tail_inf(ratios);
  return {inf > -kDivergenceThreshold, std::max(0.0, -inf)};
}

struct ProblemCalmness {
  bool calm = true;
  double a_estimate = 0.0;
  /// Tail samples realizing the smallest ratios, worst first.
  std::vector<RatioWitness> witnesses;
  std::size_t pairs = 0;
};

/// ω-calmness at x*: f(x) >= f(x*) - a ω(p) for x ∈ Ω(p) near x*. Pairs (p, x)
/// combine tail shell samples x with the shell radii as p values and, when the
/// family knows it, the tightest p = d(0, Ω^{-1}(x)).
inline ProblemCalmness check_problem_omega_calmness(const ConstrainedProblem& problem, const PerturbedFamily& family,
                                                    std::span<const double> x_star, const RateModulus& omega,
                                                    const SamplingSchedule& schedule = SamplingSchedule::local_default()) {
  problem.check_point(x_star);
  schedule.validate();
  const ExtReal f_star = problem.f(x_star);
  if (f_star.is_infinite()) throw PreconditionError("check_problem_omega_calmness: f(x*) = +inf");
  std::vector<double> p_vals;
  for (int j = 0; j <= schedule.shells; ++j) p_vals.push_back(schedule.radius(j));
  if (!omega.strictly_increasing_on(p_vals))
    throw PreconditionError("check_problem_omega_calmness: omega must be strictly increasing");

  ProblemCalmness out;
  double inf = std::numeric_limits<double>::infinity();
  const int per_shell = schedule.samples(problem.dim);
  auto consider = [&](const Point& y, double p, int shell, double fy) {
    const double w = omega(p);
    if (!(w > 0.0)) return;
    ++out.pairs;
    const double ratio = (fy - f_star.value()) / w;
    if (ratio < inf) {
      inf = ratio;
      out.witnesses.insert(out.witnesses.begin(), RatioWitness{y, ratio, shell});
      if (out.witnesses.size() > 8) out.witnesses.pop_back();
    }
  };
  for (int j = schedule.tail_begin(); j < schedule.shells; ++j) {
    for (int k = 0; k < per_shell; ++k) {
      const ShellSample s = shell_sample(x_star, schedule, j, k, problem.norm);
      if (!problem.in_ambient(s.y)) continue;
      const ExtReal fy = problem.f(s.y);
      if (fy.is_infinite()) continue;
      if (family.inverse_distance) {
        const double p = family.inverse_distance(s.y);
        if (p > 0.0 && family.feasible_at(p, s.y)) consider(s.y, p, j, fy.value());
      }
      for (double p : p_vals)
        if (family.feasible_at(p, s.y)) consider(s.y, p, j, fy.value());
    }
  }
  if (out.pairs == 0) return out;
  out.calm = inf > -kDivergenceThreshold;
  out.a_estimate = std::max(0.0, -inf);
  return out;
}

struct CalmnessCrossCheck {
  LambdaBarEstimate lambda_bar;
  ProblemCalmness calmness;
  bool exact_locally = false;
  bool agree = false;
};

/// Local exactness at x* against calmness of the φ-level family with ω = identity.
inline CalmnessCrossCheck cross_check_calmness_vs_exactness(
    const ConstrainedProblem& problem, std::span<const double> x_star,
    const SamplingSchedule& schedule = SamplingSchedule::local_default()) {
  CalmnessCrossCheck out;
  out.lambda_bar = estimate_lambda_bar(problem, x_star, schedule);
  out.calmness = check_problem_omega_calmness(problem, PerturbedFamily::phi_level(problem), x_star,
                                              RateModulus::identity(), schedule);
  out.exact_locally = out.lambda_bar.verdict != LambdaBarVerdict::diverging;
  out.agree = out.exact_locally == out.calmness.calm;
  return out;
}

}  // namespace exactpen
