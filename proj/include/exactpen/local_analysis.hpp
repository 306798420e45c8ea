#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/modulus.hpp"
#include "exactpen/parallel.hpp"
#include "exactpen/problem.hpp"
#include "exactpen/schedule.hpp"

namespace exactpen {

/// Largest φ(x*) accepted as "feasible" by the local estimators.
inline constexpr double kZeroPenaltyTol = 1e-12;
/// Samples with φ(y) - φ(x*) at or below this are treated as points of M.
inline constexpr double kRatioDenominatorFloor = 1e-14;
/// Numeric divergence threshold shared by every tail estimator.
inline constexpr double kDivergenceThreshold = 1e6;

enum class LambdaBarVerdict { finite, diverging, no_infeasible_points };
enum class ValueKind { finite, minus_infinity, diverging };

inline const char* to_string(LambdaBarVerdict v) {
  switch (v) {
    case LambdaBarVerdict::finite:
      return "finite";
    case LambdaBarVerdict::diverging:
      return "diverging";
    case LambdaBarVerdict::no_infeasible_points:
      return "no_infeasible_points";
  }
  return "";
}

inline const char* to_string(ValueKind v) {
  switch (v) {
    case ValueKind::finite:
      return "finite";
    case ValueKind::minus_infinity:
      return "minus_infinity";
    case ValueKind::diverging:
      return "diverging";
  }
  return "";
}

struct RatioWitness {
  Point y;
  double ratio = 0.0;
  int shell = 0;
};

/// Sampled estimate of the limsup of (f(x*) - f(y)) / (φ(y) - φ(x*)) over
/// infeasible y -> x*. Every sampled ratio is a witness, so the value is a
/// certified lower bound on the true quantity; finiteness is only heuristic.
struct LambdaBarEstimate {
  LambdaBarVerdict verdict = LambdaBarVerdict::no_infeasible_points;
  ValueKind kind = ValueKind::minus_infinity;
  double value = -std::numeric_limits<double>::infinity();
  /// -inf for shells without infeasible samples.
  std::vector<double> per_shell_sup;
  std::size_t samples_used = 0;
  std::size_t skipped_infinite = 0;
  /// Best ratio of every non-empty tail shell.
  std::vector<RatioWitness> witnesses;
};

/// Tail aggregation shared by the limsup estimators: max over the tail, with
/// a divergence verdict when the tail is strictly increasing past 1e6.
struct TailSummary {
  bool empty = true;
  bool diverging = false;
  double value = -std::numeric_limits<double>::infinity();
};

inline TailSummary summarize_tail_sup(std::span<const double> values, std::size_t tail_begin) {
  TailSummary s;
  bool increasing = true;
  double prev = -std::numeric_limits<double>::infinity();
  bool all_present = true;
  for (std::size_t j = tail_begin; j < values.size(); ++j) {
    const double v = values[j];
    if (!std::isfinite(v)) {
      all_present = false;
      continue;
    }
    s.empty = false;
    s.value = std::max(s.value, v);
    if (!(v > prev)) increasing = false;
    prev = v;
  }
  s.diverging = !s.empty && all_present && increasing && values.back() > kDivergenceThreshold;
  return s;
}

inline LambdaBarEstimate estimate_lambda_bar(const ConstrainedProblem& problem, std::span<const double> x_star,
                                             const SamplingSchedule& schedule = SamplingSchedule::local_default()) {
  problem.check_point(x_star);
  schedule.validate();
  if (!problem.in_ambient(x_star)) throw PreconditionError("estimate_lambda_bar: x* is not in A");
  const double phi_star = problem.phi(x_star);
  if (phi_star > kZeroPenaltyTol) throw PreconditionError("estimate_lambda_bar: x* is infeasible (phi > 0)");
  const ExtReal f_star = problem.f(x_star);
  if (f_star.is_infinite()) throw PreconditionError("estimate_lambda_bar: f(x*) = +inf");

  const int shells = schedule.shells;
  const int per_shell = schedule.samples(problem.dim);
  struct ShellResult {
    double sup = -std::numeric_limits<double>::infinity();
    std::size_t used = 0, skipped = 0;
    // Infeasible samples whose φ gap fell below the floor.
    std::size_t unresolved = 0;
    RatioWitness best;
  };
  std::vector<ShellResult> results(static_cast<std::size_t>(shells));
  parallel_for(results.size(), [&](std::size_t js) {
    const int j = static_cast<int>(js);
    ShellResult& r = results[js];
    for (int k = 0; k < per_shell; ++k) {
      ShellSample s = shell_sample(x_star, schedule, j, k, problem.norm);
      if (!problem.in_ambient(s.y)) continue;
      const double denom = problem.phi(s.y) - phi_star;
      if (denom <= kRatioDenominatorFloor) {
        if (denom > 0.0) ++r.unresolved;
        continue;
      }
      const ExtReal fy = problem.f(s.y);
      if (fy.is_infinite()) {
        ++r.skipped;
        continue;
      }
      ++r.used;
      const double ratio = (f_star.value() - fy.value()) / denom;
      if (ratio > r.sup) {
        r.sup = ratio;
        r.best = {s.y, ratio, j};
      }
    }
  });

  LambdaBarEstimate est;
  est.per_shell_sup.reserve(results.size());
  for (const ShellResult& r : results) {
    est.per_shell_sup.push_back(r.sup);
    est.samples_used += r.used;
    est.skipped_infinite += r.skipped;
  }
  const auto tail_begin = static_cast<std::size_t>(schedule.tail_begin());
  for (std::size_t j = tail_begin; j < results.size(); ++j)
    if (results[j].used > 0) est.witnesses.push_back(results[j].best);

  if (est.samples_used == 0) {
    est.verdict = LambdaBarVerdict::no_infeasible_points;
    est.kind = ValueKind::minus_infinity;
    return est;
  }
  // Innermost shells that only met the denominator floor lie below the
  // resolution of φ; they carry no evidence either way.
  std::size_t resolved_end = results.size();
  while (resolved_end > tail_begin + 1 && results[resolved_end - 1].used == 0 && results[resolved_end - 1].unresolved > 0)
    --resolved_end;
  const TailSummary tail =
      summarize_tail_sup(std::span<const double>(est.per_shell_sup).first(resolved_end), tail_begin);
  if (tail.diverging) {
    est.verdict = LambdaBarVerdict::diverging;
    est.kind = ValueKind::diverging;
    est.value = std::numeric_limits<double>::infinity();
  } else if (tail.empty) {
    est.verdict = LambdaBarVerdict::finite;
    est.kind = ValueKind::minus_infinity;
  } else {
    est.verdict = LambdaBarVerdict::finite;
    est.kind = ValueKind::finite;
    est.value = tail.value;
  }
  return est;
}

/// λ*(x*) = max{λ̄(x*), 0}; nullopt when the estimate diverges (not exact).
inline std::optional<double> least_local_parameter(const LambdaBarEstimate& est) {
  if (est.verdict == LambdaBarVerdict::diverging) return std::nullopt;
  if (est.kind != ValueKind::finite) return 0.0;
  return std::max(est.value, 0.0);
}

struct LocalMinimumCheck {
  bool is_local_minimum = true;
  std::optional<Point> witness;
  /// min over the probed samples of F(y) - F(x*).
  double worst_gap = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
};

/// Probes the three innermost shells for a point of A with F_λ(y) < F_λ(x*) - 1e-12.
inline LocalMinimumCheck check_local_minimum(const PenaltyFunction& pf, std::span<const double> x_star,
                                             const SamplingSchedule& schedule = SamplingSchedule::local_default()) {
  const ConstrainedProblem& problem = pf.problem;
  problem.check_point(x_star);
  schedule.validate();
  if (!problem.in_ambient(x_star)) throw PreconditionError("check_local_minimum: x* is not in A");
  const ExtReal base = pf(x_star);
  if (base.is_infinite()) throw PreconditionError("check_local_minimum: F(x*) = +inf");

  LocalMinimumCheck out;
  const int per_shell = schedule.samples(problem.dim);
  for (int j = schedule.shells - 3; j < schedule.shells; ++j) {
    for (int k = 0; k < per_shell; ++k) {
      ShellSample s = shell_sample(x_star, schedule, j, k, problem.norm);
      if (!problem.in_ambient(s.y)) continue;
      const ExtReal v = pf(s.y);
      ++out.samples;
      if (v.is_infinite()) continue;
      const double gap = v.value() - base.value();
      if (gap < out.worst_gap) {
        out.worst_gap = gap;
        if (gap < -1e-12) out.witness = s.y;
      }
    }
  }
  out.is_local_minimum = !(out.worst_gap < -1e-12);
  if (out.is_local_minimum) out.witness.reset();
  return out;
}

/// Default t-grid for error_bound_sigma: t_j = 2^-j, j = 0..59.
inline std::vector<double> default_t_grid() {
  std::vector<double> g;
  for (int j = 0; j < 60; ++j) g.push_back(std::ldexp(1.0, -j));
  return g;
}

struct SigmaEstimate {
  bool diverging = false;
  double value = 0.0;
  std::vector<double> ratios;
};

/// Numerical limsup of ω(t)/η(t) as t -> 0+ over the grid tail.
inline SigmaEstimate error_bound_sigma(const RateModulus& omega, const RateModulus& eta,
                                       std::span<const double> t_grid) {
  if (t_grid.size() < 3) throw PreconditionError("error_bound_sigma: need at least 3 grid points");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0)) throw PreconditionError("error_bound_sigma: grid points must be positive");
    if (i > 0 && !(t_grid[i] < t_grid[i - 1])) throw PreconditionError("error_bound_sigma: grid must decrease");
  }
  SigmaEstimate out;
  for (double t : t_grid) {
    const double e = eta(t);
    if (!(e > 0.0)) throw PreconditionError("error_bound_sigma: eta vanishes at a positive t");
    out.ratios.push_back(omega(t) / e);
  }
  const std::size_t tail_begin = t_grid.size() - (t_grid.size() + 2) / 3;
  const TailSummary tail = summarize_tail_sup(out.ratios, tail_begin);
  out.diverging = tail.diverging;
  out.value = tail.diverging ? std::numeric_limits<double>::infinity() : tail.value;
  return out;
}

inline SigmaEstimate error_bound_sigma(const RateModulus& omega, const RateModulus& eta) {
  return error_bound_sigma(omega, eta, default_t_grid());
}

struct BoundCheckReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  /// Smallest observed margin (lhs - rhs of the tested inequality).
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<Point> witness;
  bool approximate_distance = false;
};

namespace detail {

template <typename MarginFn>
BoundCheckReport run_bound_check(const ConstrainedProblem& problem, const Region& region, std::size_t n_samples,
                                 std::uint64_t seed, const FeasibleDistance& dist, MarginFn margin_of) {
  if (region.dim() != problem.dim) throw DimensionError("bound check: region dimension mismatch");
  BoundCheckReport rep;
  rep.approximate_distance = dist.approximate();
  for (const Point& x : sample_cloud(region, n_samples, seed)) {
    if (!problem.in_ambient(x)) continue;
    ++rep.samples;
    const double m = margin_of(x);
    if (m < rep.worst_margin) {
      rep.worst_margin = m;
      rep.witness = x;
    }
    if (m < -1e-9) ++rep.violations;
  }
  rep.violation_fraction = rep.samples ? static_cast<double>(rep.violations) / static_cast<double>(rep.samples) : 0.0;
  if (rep.violations == 0) rep.witness.reset();
  return rep;
}

}  // namespace detail

/// Checks φ(x) >= η(d(x, Ω)) on a sample of region ∩ A.
inline BoundCheckReport verify_penalty_error_bound(const ConstrainedProblem& problem, const RateModulus& eta,
                                                   const Region& region, std::size_t n_samples = 4096,
                                                   std::uint64_t seed = 0) {
  const FeasibleDistance dist(problem, region, seed);
  return detail::run_bound_check(problem, region, n_samples, seed, dist,
                                 [&](const Point& x) { return problem.phi(x) - eta(dist(x)); });
}

/// Checks f(y) >= f(x*) - ω(d(y, Ω)) on a sample of region ∩ A.
inline BoundCheckReport verify_objective_bound(const ConstrainedProblem& problem, const RateModulus& omega,
                                               std::span<const double> x_star, const Region& region,
                                               std::size_t n_samples = 4096, std::uint64_t seed = 0) {
  problem.check_point(x_star);
  const ExtReal f_star = problem.f(x_star);
  if (f_star.is_infinite()) throw PreconditionError("verify_objective_bound: f(x*) = +inf");
  const FeasibleDistance dist(problem, region, seed);
  return detail::run_bound_check(problem, region, n_samples, seed, dist, [&](const Point& y) {
    const ExtReal fy = problem.f(y);
    if (fy.is_infinite()) return std::numeric_limits<double>::infinity();
    return fy.value() - (f_star.value() - omega(dist(y)));
  });
}

}  // namespace exactpen
