#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/minimizer.hpp"
#include "exactpen/parallel.hpp"
#include "exactpen/problem.hpp"
#include "exactpen/schedule.hpp"

namespace exactpen {

/// Rate tolerance below which a point counts as inf-stationary.
inline constexpr double kStationaryTol = 1e-4;
/// Clusters with φ at or below this are labelled feasible.
inline constexpr double kStationaryFeasTol = 1e-8;

struct DescentEstimate {
  /// Estimate of g↓_A(x); +inf when no tail sample had finite g.
  double rate = std::numeric_limits<double>::infinity();
  double strong_slope = 0.0;
  std::size_t samples = 0;
  int shells_used = 0;
};

/// liminf of (g(y) - g(x)) / d(y, x) over y -> x in A: the minimum over the
/// tail shells of each shell's smallest difference quotient. In two or more
/// dimensions each shell's best direction is refined by a few perturbations.
inline DescentEstimate rate_of_steepest_descent(const ObjectiveMap& g, const Predicate& ambient,
                                                std::span<const double> x,
                                                const SamplingSchedule& schedule = SamplingSchedule::descent_default(),
                                                Norm norm_kind = Norm::euclidean) {
  schedule.validate();
  if (ambient && !ambient(x)) throw PreconditionError("rate_of_steepest_descent: x is not in A");
  const ExtReal gx = g(x);
  if (gx.is_infinite()) throw PreconditionError("rate_of_steepest_descent: g(x) = +inf");
  const std::size_t n = x.size();
  const int per_shell = schedule.samples(n);

  DescentEstimate est;
  for (int j = schedule.tail_begin(); j < schedule.shells; ++j) {
    double shell_min = std::numeric_limits<double>::infinity();
    Point best_u;
    double best_rho = 0.0;
    auto probe = [&](const Point& y, double d) {
      if (ambient && !ambient(y)) return false;
      const ExtReal gy = g(y);
      ++est.samples;
      if (gy.is_infinite() || !(d > 0.0)) return false;
      const double q = (gy.value() - gx.value()) / d;
      if (q < shell_min) {
        shell_min = q;
        return true;
      }
      return false;
    };
    for (int k = 0; k < per_shell; ++k) {
      const ShellSample s = shell_sample(x, schedule, j, k, norm_kind);
      if (probe(s.y, s.dist)) {
        best_u.resize(n);
        for (std::size_t i = 0; i < n; ++i) best_u[i] = (s.y[i] - x[i]) / s.dist;
        best_rho = s.dist;
      }
    }
    if (n >= 2 && !best_u.empty()) {
      Rng rng = Rng::keyed(schedule.seed, hash_point(x), static_cast<std::uint64_t>(j), 0x5107eULL);
      for (double spread : {0.1, 0.01}) {
        for (std::size_t k = 0; k < 2 * n; ++k) {
          Point u = best_u;
          for (double& v : u) v += spread * rng.normal();
          const double len = norm(u, norm_kind);
          if (len == 0.0) continue;
          Point y(x.begin(), x.end());
          for (std::size_t i = 0; i < n; ++i) y[i] += best_rho * u[i] / len;
          probe(y, distance(y, x, norm_kind));
        }
      }
    }
    if (std::isfinite(shell_min)) {
      ++est.shells_used;
      est.rate = std::min(est.rate, shell_min);
    }
  }
  est.strong_slope = std::isfinite(est.rate) ? std::max(-est.rate, 0.0) : 0.0;
  return est;
}

inline DescentEstimate rate_of_steepest_descent(const PenaltyFunction& pf, std::span<const double> x,
                                                const SamplingSchedule& schedule = SamplingSchedule::descent_default()) {
  pf.problem.check_point(x);
  return rate_of_steepest_descent([&pf](std::span<const double> y) { return pf(y); }, pf.problem.ambient, x,
                                  schedule, pf.problem.norm);
}

/// Rate of steepest descent of φ at x.
inline DescentEstimate penalty_descent_rate(const ConstrainedProblem& problem, std::span<const double> x,
                                            const SamplingSchedule& schedule = SamplingSchedule::descent_default()) {
  problem.check_point(x);
  return rate_of_steepest_descent([&problem](std::span<const double> y) { return ExtReal(problem.phi(y)); },
                                  problem.ambient, x, schedule, problem.norm);
}

struct StationaryCluster {
  Point x;
  double rate = 0.0;
  double phi = 0.0;
  bool feasible = false;
  std::size_t members = 0;
};

struct StationaryReport {
  double lambda = 0.0;
  std::vector<StationaryCluster> clusters;

  [[nodiscard]] std::size_t infeasible_count() const {
    return static_cast<std::size_t>(
        std::count_if(clusters.begin(), clusters.end(), [](const StationaryCluster& c) { return !c.feasible; }));
  }
};

struct StationaryOptions {
  std::size_t n_seeds = 64;
  double tol = kStationaryTol;
  std::uint64_t seed = 0;
  SamplingSchedule schedule = SamplingSchedule::descent_default();
  /// Evaluation cap for the slope-minimizing phase of each seed.
  std::size_t slope_evals = 400;
};

/// Inf-stationary points of F_λ (rate >= -tol) reached from deterministic
/// seeds in the region. Each seed runs a descent on F_λ and a descent on the
/// estimated strong slope; the second phase also finds stationary points that
/// are not minima. Results closer than 1e-4 are merged.
inline StationaryReport find_inf_stationary(const PenaltyFunction& pf, const Region& region,
                                            const StationaryOptions& options = {}) {
  const ConstrainedProblem& problem = pf.problem;
  if (region.dim() != problem.dim) throw DimensionError("find_inf_stationary: region dimension mismatch");
  options.schedule.validate();
  StationaryReport rep;
  rep.lambda = pf.lambda;

  std::vector<Point> seeds;
  for (Point& x : sample_cloud(region, options.n_seeds, options.seed))
    if (problem.in_ambient(x) && pf(x).is_finite()) seeds.push_back(std::move(x));

  const double spacing =
      region.max_extent() / std::max(1.0, std::ceil(std::pow(static_cast<double>(options.n_seeds),
                                                              1.0 / static_cast<double>(problem.dim))));
  const std::vector<double> steps(problem.dim, spacing);
  auto slope = [&](std::span<const double> y) -> ExtReal {
    if (pf(y).is_infinite()) return ExtReal::infinity();
    return ExtReal(rate_of_steepest_descent(pf, y, options.schedule).strong_slope);
  };

  struct Candidate {
    Point x;
    double rate;
  };
  std::vector<std::vector<Candidate>> found(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    const DescentResult a = pattern_search(pf, region, problem.ambient, seeds[s], steps, 1e-10, 20000);
    const DescentResult b =
        pattern_search(slope, region, problem.ambient, seeds[s], steps, 1e-9, options.slope_evals);
    for (const DescentResult* r : {&a, &b}) {
      if (r->value.is_infinite()) continue;
      const double rate = rate_of_steepest_descent(pf, r->x, options.schedule).rate;
      if (rate >= -options.tol) found[s].push_back({r->x, rate});
    }
  });

  std::vector<Candidate> all;
  for (auto& v : found)
    for (auto& c : v) all.push_back(std::move(c));
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) { return lex_less(a.x, b.x); });
  for (const Candidate& c : all) {
    auto it = std::find_if(rep.clusters.begin(), rep.clusters.end(), [&](const StationaryCluster& cl) {
      return distance(cl.x, c.x, problem.norm) <= 1e-4;
    });
    if (it != rep.clusters.end()) {
      ++it->members;
      continue;
    }
    StationaryCluster cl;
    cl.x = c.x;
    cl.rate = c.rate;
    cl.phi = problem.phi(c.x);
    cl.feasible = cl.phi <= kStationaryFeasTol;
    cl.members = 1;
    rep.clusters.push_back(std::move(cl));
  }
  return rep;
}

/// No infeasible inf-stationary points exist for λ > L / a.
inline double infeasible_stationarity_bound(double L, double a) {
  if (!(a > 0.0)) throw PreconditionError("infeasible_stationarity_bound: a must be positive");
  if (!(L >= 0.0)) throw PreconditionError("infeasible_stationarity_bound: L must be >= 0");
  return L / a;
}

struct DescentHypothesisReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  /// Largest φ rate seen on infeasible samples.
  double worst_rate = -std::numeric_limits<double>::infinity();
  std::vector<Point> witnesses;
};

/// Checks φ↓(x) <= -a on sampled infeasible points of the region.
inline DescentHypothesisReport verify_descent_hypothesis(const ConstrainedProblem& problem, const Region& region,
                                                         double a, std::size_t n_samples = 512,
                                                         std::uint64_t seed = 0, double tol = kStationaryTol) {
  if (!(a > 0.0)) throw PreconditionError("verify_descent_hypothesis: a must be positive");
  std::vector<Point> pts;
  for (Point& x : sample_cloud(region, n_samples, seed))
    if (problem.in_ambient(x) && problem.phi(x) > 0.0) pts.push_back(std::move(x));
  SamplingSchedule sched = SamplingSchedule::descent_default();
  sched.seed = seed;
  std::vector<double> rates(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { rates[i] = penalty_descent_rate(problem, pts[i], sched).rate; });
  DescentHypothesisReport rep;
  rep.samples = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rep.worst_rate = std::max(rep.worst_rate, rates[i]);
    if (rates[i] > -a + tol) {
      ++rep.violations;
      if (rep.witnesses.size() < 16) rep.witnesses.push_back(pts[i]);
    }
  }
  rep.violation_fraction = pts.empty() ? 0.0 : static_cast<double>(rep.violations) / static_cast<double>(pts.size());
  return rep;
}

/// Largest difference quotient of f over pairs of sampled infeasible points.
/// A lower estimate of the Lipschitz constant on region \ Ω.
inline double estimate_lipschitz(const ConstrainedProblem& problem, const Region& region,
                                 std::size_t n_samples = 4096, std::uint64_t seed = 0) {
  struct Sample {
    Point x;
    double f;
  };
  std::vector<Sample> pts;
  for (Point& x : sample_cloud(region, n_samples, seed)) {
    if (!problem.in_ambient(x) || problem.phi(x) <= 0.0) continue;
    const ExtReal fx = problem.f(x);
    if (fx.is_finite()) pts.push_back({std::move(x), fx.value()});
  }
  // Keep at most ~1e6 pairs with an even stride so grid neighbours stay close.
  const std::size_t cap = 1414;
  if (pts.size() > cap) {
    std::vector<Sample> kept;
    for (std::size_t i = 0; i < cap; ++i) kept.push_back(pts[i * pts.size() / cap]);
    pts = std::move(kept);
  }
  double L = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = distance(pts[i].x, pts[j].x, problem.norm);
      if (d > 0.0) L = std::max(L, std::abs(pts[i].f - pts[j].f) / d);
    }
  return L;
}

struct PalaisSmaleProbe {
  bool violates = false;
  bool phi_vanishes = false;
  bool rates_vanish = false;
  bool no_cauchy_pair = false;
  std::vector<double> tail_phi;
  std::vector<double> tail_rates;
  double min_pair_distance = std::numeric_limits<double>::infinity();
};

/// Looks for a witness against the generalized Palais-Smale condition on φ:
/// an infeasible sequence whose tail has φ -> 0, φ rates >= -1e-3 and no two
/// points within 1e-3 of each other.
inline PalaisSmaleProbe palais_smale_probe(const ConstrainedProblem& problem, std::span<const Point> sequence,
                                           const SamplingSchedule& schedule = SamplingSchedule::descent_default()) {
  if (sequence.size() < 8) throw PreconditionError("palais_smale_probe: need at least 8 points");
  for (const Point& x : sequence) {
    problem.check_point(x);
    if (!(problem.phi(x) > 0.0)) throw PreconditionError("palais_smale_probe: sequence points must be infeasible");
  }
  const std::size_t tail = (sequence.size() + 2) / 3;
  const std::span<const Point> t = sequence.subspan(sequence.size() - tail);
  PalaisSmaleProbe out;
  for (const Point& x : t) out.tail_phi.push_back(problem.phi(x));
  out.tail_rates.resize(t.size());
  parallel_for(t.size(), [&](std::size_t i) { out.tail_rates[i] = penalty_descent_rate(problem, t[i], schedule).rate; });

  out.phi_vanishes = out.tail_phi.back() <= 1e-3;
  for (std::size_t i = 1; i < out.tail_phi.size(); ++i)
    if (out.tail_phi[i] > out.tail_phi[i - 1] * (1.0 + 1e-12)) out.phi_vanishes = false;
  out.rates_vanish = std::all_of(out.tail_rates.begin(), out.tail_rates.end(), [](double r) { return r >= -1e-3; });
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      out.min_pair_distance = std::min(out.min_pair_distance, distance(t[i], t[j], problem.norm));
  out.no_cauchy_pair = out.min_pair_distance > 1e-3;
  out.violates = out.phi_vanishes && out.rates_vanish && out.no_cauchy_pair;
  return out;
}

}  // namespace exactpen
