#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/minimizer.hpp"
#include "exactpen/problem.hpp"

namespace exactpen {

/// φ values at or below this count as feasible for path and solver logic.
inline constexpr double kPathFeasTol = 1e-8;

/// One numerical selection x(λ) ∈ G(λ).
struct Rung {
  double lambda = 0.0;
  Point x;
  double f_val = 0.0;
  double phi_val = 0.0;
  double penalized = 0.0;
  InnerStatus inner_status = InnerStatus::converged;
};

struct PenaltyPath {
  std::vector<Rung> rungs;
  std::optional<double> fstar;
  Region region;
};

/// Approximate global minimizer of F_λ over A ∩ region.
inline Rung solve_G(const ConstrainedProblem& problem, double lambda, const Region& region,
                    const MinimizeOptions& options) {
  if (region.dim() != problem.dim) throw DimensionError("solve_G: region dimension mismatch");
  const PenaltyFunction pf(problem, lambda);
  const MinimizeResult r = minimize(pf, region, problem.ambient, options);
  if (!r.found)
    throw EmptyRegionError("solve_G: no point of A with finite F found in " + region.describe());
  Rung rung;
  rung.lambda = lambda;
  rung.x = r.x;
  rung.f_val = problem.f(r.x).value();
  rung.phi_val = problem.phi(r.x);
  rung.penalized = r.value.value();
  rung.inner_status = r.status;
  return rung;
}

inline Rung solve_G(const ConstrainedProblem& problem, double lambda, const Region& region,
                    std::size_t multistart_budget = 0, std::uint64_t seed = 0) {
  MinimizeOptions opts;
  opts.starts = multistart_budget;
  opts.seed = seed;
  return solve_G(problem, lambda, region, opts);
}

/// Solves G(λ) along an increasing ladder, warm-starting each rung from the
/// previous minimizer.
inline PenaltyPath build_penalty_path(const ConstrainedProblem& problem, std::span<const double> ladder,
                                      const Region& region, MinimizeOptions options = {}) {
  if (ladder.empty()) throw PreconditionError("build_penalty_path: empty ladder");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] > ladder[i - 1])) throw PreconditionError("build_penalty_path: ladder must be strictly increasing");
  PenaltyPath path{{}, problem.fstar_hint, region};
  const std::vector<Point> user_warm = options.warm_starts;
  for (double lambda : ladder) {
    options.warm_starts = user_warm;
    if (!path.rungs.empty()) options.warm_starts.push_back(path.rungs.back().x);
    path.rungs.push_back(solve_G(problem, lambda, region, options));
  }
  return path;
}

/// f* on Ω ∩ region: the problem's hint, or a minimization of f restricted to
/// {φ <= 1e-10}. nullopt when no feasible point is found.
inline std::optional<double> compute_fstar(const ConstrainedProblem& problem, const Region& region,
                                           MinimizeOptions options = {}) {
  if (problem.fstar_hint) return problem.fstar_hint;
  auto restricted = [&](std::span<const double> x) -> ExtReal {
    if (problem.phi(x) > FeasibleDistance::kFeasibleTol) return ExtReal::infinity();
    return problem.f(x);
  };
  const MinimizeResult r = minimize(restricted, region, problem.ambient, options);
  if (!r.found) return std::nullopt;
  return r.value.value();
}

enum class SupVerdict { finite, diverging, inconclusive };

inline const char* to_string(SupVerdict v) {
  switch (v) {
    case SupVerdict::finite:
      return "finite";
    case SupVerdict::diverging:
      return "diverging";
    case SupVerdict::inconclusive:
      return "inconclusive";
  }
  return "";
}

struct SupEstimate {
  /// Largest witnessed ratio (f* - f(x)) / φ(x), including local polishing.
  double lower_bound = -std::numeric_limits<double>::infinity();
  /// Cumulative maximum after each cloud level (or each region).
  std::vector<double> trace;
  SupVerdict verdict = SupVerdict::inconclusive;
  std::optional<Point> witness;
  std::size_t infeasible_samples = 0;
  double fstar = 0.0;
};

namespace detail {

inline double resolve_fstar(const ConstrainedProblem& problem, const Region& region, std::optional<double> fstar) {
  if (fstar) return *fstar;
  const auto v = compute_fstar(problem, region);
  if (!v) throw PreconditionError("no feasible point available to compute f* in " + region.describe());
  return *v;
}

// Ratio (f* - f(x)) / φ(x) on A \ Ω, nullopt elsewhere.
inline std::optional<double> sup_ratio(const ConstrainedProblem& problem, double fstar, std::span<const double> x) {
  if (!problem.in_ambient(x)) return std::nullopt;
  const double ph = problem.phi(x);
  if (ph <= 0.0) return std::nullopt;
  const ExtReal fx = problem.f(x);
  if (fx.is_infinite()) return std::nullopt;
  return (fstar - fx.value()) / ph;
}

}  // namespace detail

/// Witnessed lower bound on λ*(f, φ) = sup over A \ Ω of (f* - f)/φ, on
/// three nested clouds of the region (each at least four times denser),
/// followed by a local ascent from the best samples. Diverging when the bound
/// doubles across both refinements and exceeds 1e4, or when the ascent lifts
/// it a hundredfold past 1e4.
inline SupEstimate lambda_star_sup(const ConstrainedProblem& problem, const Region& region,
                                   std::size_t n_samples = 4096, std::uint64_t seed = 0,
                                   std::optional<double> fstar = std::nullopt, bool polish = true) {
  if (region.dim() != problem.dim) throw DimensionError("lambda_star_sup: region dimension mismatch");
  SupEstimate est;
  est.fstar = detail::resolve_fstar(problem, region, fstar);
  struct Candidate {
    double ratio;
    Point x;
  };
  std::vector<Candidate> best;
  double running = -std::numeric_limits<double>::infinity();
  for (int level = 0; level < 3; ++level) {
    for (const Point& x : sample_cloud(region, n_samples, seed, level)) {
      const auto r = detail::sup_ratio(problem, est.fstar, x);
      if (!r) continue;
      ++est.infeasible_samples;
      if (*r > running) {
        running = *r;
        est.witness = x;
      }
      if (level == 2) best.push_back({*r, x});
    }
    est.trace.push_back(running);
  }
  est.lower_bound = running;
  if (est.infeasible_samples == 0) {
    est.verdict = SupVerdict::inconclusive;
    return est;
  }

  if (polish && !best.empty()) {
    const std::size_t keep = std::min<std::size_t>(8, best.size());
    std::partial_sort(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(keep), best.end(),
                      [](const Candidate& a, const Candidate& b) {
                        return a.ratio != b.ratio ? a.ratio > b.ratio : lex_less(a.x, b.x);
                      });
    auto neg_ratio = [&](std::span<const double> x) -> ExtReal {
      const auto r = detail::sup_ratio(problem, est.fstar, x);
      if (!r) return ExtReal::infinity();
      return ExtReal(-*r);
    };
    std::vector<double> steps(problem.dim);
    for (std::size_t i = 0; i < problem.dim; ++i) steps[i] = 0.01 * (region.upper()[i] - region.lower()[i]);
    for (std::size_t k = 0; k < keep; ++k) {
      const DescentResult d = pattern_search(neg_ratio, region, problem.ambient, best[k].x, steps, 1e-10, 20000);
      if (d.value.is_finite() && -d.value.value() > est.lower_bound) {
        est.lower_bound = -d.value.value();
        est.witness = d.x;
      }
    }
  }

  const auto& t = est.trace;
  const bool doubling = t[0] > 0.0 && t[1] >= 2.0 * t[0] && t[2] >= 2.0 * t[1];
  // Polishing acts as a last refinement: a hundredfold jump past 1e4 means
  // the ratio blows up below the cloud resolution.
  const bool polish_jump = est.lower_bound > 1e4 && est.lower_bound >= 100.0 * std::max(t[2], 1.0);
  est.verdict = (doubling && t[2] > 1e4) || polish_jump ? SupVerdict::diverging : SupVerdict::finite;
  return est;
}

/// Sup bound on a sequence of growing regions; diverging when the bound at
/// least doubles from each region to the next.
inline SupEstimate lambda_star_sup_expanding(const ConstrainedProblem& problem, std::span<const Region> regions,
                                             std::size_t n_samples = 4096, std::uint64_t seed = 0,
                                             std::optional<double> fstar = std::nullopt) {
  if (regions.size() < 2) throw PreconditionError("lambda_star_sup_expanding: need at least two regions");
  SupEstimate out;
  out.fstar = detail::resolve_fstar(problem, regions.front(), fstar);
  for (const Region& r : regions) {
    const SupEstimate e = lambda_star_sup(problem, r, n_samples, seed, out.fstar, false);
    out.infeasible_samples += e.infeasible_samples;
    out.trace.push_back(e.lower_bound);
    if (e.lower_bound > out.lower_bound) {
      out.lower_bound = e.lower_bound;
      out.witness = e.witness;
    }
  }
  if (out.infeasible_samples == 0) return out;
  bool doubling = out.trace.front() > 0.0;
  for (std::size_t i = 1; i < out.trace.size(); ++i) doubling = doubling && out.trace[i] >= 2.0 * out.trace[i - 1];
  out.verdict = doubling ? SupVerdict::diverging : SupVerdict::finite;
  return out;
}

struct ExactOnSetCheck {
  bool exact = true;
  /// min over samples of F_λ(x) - f*.
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<Point> witness;
};

/// F_λ(x) >= f* - 1e-9 on a sample of C ∩ A.
inline ExactOnSetCheck check_exact_on_set(const ConstrainedProblem& problem, const Region& set, double lambda,
                                          double fstar, std::size_t n_samples = 4096, std::uint64_t seed = 0) {
  if (set.dim() != problem.dim) throw DimensionError("check_exact_on_set: set dimension mismatch");
  const PenaltyFunction pf(problem, lambda);
  ExactOnSetCheck out;
  for (const Point& x : sample_cloud(set, n_samples, seed)) {
    if (!problem.in_ambient(x)) continue;
    const ExtReal v = pf(x);
    if (v.is_infinite()) continue;
    const double m = v.value() - fstar;
    if (m < out.worst_margin) {
      out.worst_margin = m;
      out.witness = x;
    }
  }
  out.exact = !(out.worst_margin < -1e-9);
  if (out.exact) out.witness.reset();
  return out;
}

struct OmegaDeltaCloud {
  double delta = 0.0;
  std::vector<Point> points;
  /// No cloud point lies within 0.1% of the region extent of its boundary.
  bool bounded_within_region = true;
  double max_norm = 0.0;
};

/// Deterministic sample of Ω_δ = {x ∈ A : φ(x) < δ} inside the region: a
/// uniform cloud plus contractions toward a feasible anchor, which keeps thin
/// sublevel sets populated in high dimension.
inline OmegaDeltaCloud omega_delta(const ConstrainedProblem& problem, double delta, const Region& region,
                                   std::size_t n_samples = 4096, std::uint64_t seed = 0) {
  if (!(delta > 0.0)) throw PreconditionError("omega_delta: delta must be positive");
  if (region.dim() != problem.dim) throw DimensionError("omega_delta: region dimension mismatch");
  OmegaDeltaCloud out;
  out.delta = delta;
  const std::vector<Point> cloud = sample_cloud(region, n_samples, seed);
  const Point* anchor_seed = nullptr;
  double anchor_phi = std::numeric_limits<double>::infinity();
  for (const Point& x : cloud) {
    if (!problem.in_ambient(x)) continue;
    const double ph = problem.phi(x);
    if (ph < delta) out.points.push_back(x);
    if (ph < anchor_phi) {
      anchor_phi = ph;
      anchor_seed = &x;
    }
  }
  if (anchor_seed) {
    auto phi_only = [&](std::span<const double> x) -> ExtReal { return ExtReal(problem.phi(x)); };
    std::vector<double> steps(problem.dim);
    for (std::size_t i = 0; i < problem.dim; ++i) steps[i] = 0.125 * (region.upper()[i] - region.lower()[i]);
    const Point anchor = pattern_search(phi_only, region, problem.ambient, *anchor_seed, steps, 1e-10, 200000).x;
    Rng rng = Rng::keyed(seed, 0xde17aULL);
    for (std::size_t k = 0; k < n_samples; ++k) {
      const Point u = uniform_point(region, rng);
      const double t = std::ldexp(1.0, -static_cast<int>(rng.uniform(0.0, 30.0)));
      Point x(problem.dim);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = anchor[i] + t * (u[i] - anchor[i]);
      if (!region.contains(x) || !problem.in_ambient(x)) continue;
      if (problem.phi(x) < delta) out.points.push_back(std::move(x));
    }
  }
  if (out.points.empty()) throw EmptyRegionError("omega_delta: no point with phi < delta found in " + region.describe());
  const double band = 1e-3 * region.max_extent();
  for (const Point& x : out.points) {
    out.max_norm = std::max(out.max_norm, norm(x, problem.norm));
    if (region.boundary_gap(x) <= band) out.bounded_within_region = false;
  }
  return out;
}

struct LemmaBound {
  bool unbounded_below = false;
  /// inf of F_μ over A ∩ region.
  double c = 0.0;
  /// c on each scaled region when expansions were requested.
  std::vector<double> c_trace;
  double lambda_star_omega_delta = 0.0;
  double bound = 0.0;
  double mu = 0.0, delta = 0.0, fstar = 0.0;
};

struct LemmaOptions {
  std::size_t n_samples = 4096;
  std::uint64_t seed = 0;
  /// Number of region doublings used to detect F_μ unbounded below.
  int expansions = 0;
  MinimizeOptions inner;
};

/// max{λ*(Ω_δ), μ + (f* - c)/δ} with c = inf F_μ, estimated on the region.
inline LemmaBound lemma_exactness_bound(const ConstrainedProblem& problem, double mu, double delta,
                                        const Region& region, std::optional<double> fstar = std::nullopt,
                                        const LemmaOptions& options = {}) {
  if (!(mu >= 0.0)) throw PreconditionError("lemma_exactness_bound: mu must be >= 0");
  if (!(delta > 0.0)) throw PreconditionError("lemma_exactness_bound: delta must be positive");
  LemmaBound out;
  out.mu = mu;
  out.delta = delta;
  out.fstar = detail::resolve_fstar(problem, region, fstar);
  MinimizeOptions inner = options.inner;
  inner.seed = options.seed;
  out.c = solve_G(problem, mu, region, inner).penalized;
  out.c_trace.push_back(out.c);
  if (options.expansions > 0) {
    bool decreasing = true;
    for (int e = 1; e <= options.expansions; ++e) {
      const double c = solve_G(problem, mu, region.scaled(std::ldexp(1.0, e)), inner).penalized;
      decreasing = decreasing && c < out.c_trace.back() - 1e-6;
      out.c_trace.push_back(c);
    }
    out.unbounded_below = decreasing;
  }
  const OmegaDeltaCloud slab = omega_delta(problem, delta, region, options.n_samples, options.seed);
  double sup = 0.0;
  for (const Point& x : slab.points)
    if (const auto r = detail::sup_ratio(problem, out.fstar, x)) sup = std::max(sup, *r);
  out.lambda_star_omega_delta = sup;
  out.bound = out.unbounded_below ? std::numeric_limits<double>::infinity()
                                  : std::max(sup, mu + (out.fstar - out.c) / delta);
  return out;
}

struct NondegeneracyReport {
  /// Heuristic flags: a single computed selection can falsify but never
  /// certify (strong) non-degeneracy.
  bool nondegenerate = false;
  bool strongly = false;
  std::vector<double> norms;
  std::vector<double> distances;
  bool approximate_distance = false;
  std::vector<std::string> evidence;
};

inline NondegeneracyReport nondegeneracy_diagnostic(const PenaltyPath& path, const ConstrainedProblem& problem) {
  if (path.rungs.size() < 4) throw PreconditionError("nondegeneracy_diagnostic: need at least 4 rungs");
  const FeasibleDistance dist(problem, path.region);
  NondegeneracyReport rep;
  rep.approximate_distance = dist.approximate();
  for (const Rung& r : path.rungs) {
    rep.norms.push_back(norm(r.x, problem.norm));
    rep.distances.push_back(dist(r.x));
  }
  const std::size_t n = path.rungs.size();
  const std::size_t tail_begin = n - (n + 1) / 2;
  const double band = 1e-6 * std::max(1.0, path.region.max_extent());
  bool interior = true;
  bool non_increasing = true;
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = tail_begin; i < n; ++i) {
    if (path.region.boundary_gap(path.rungs[i].x) <= band) {
      interior = false;
      rep.evidence.push_back("rung lambda=" + std::to_string(path.rungs[i].lambda) + " sits on the region boundary");
    }
    if (i > tail_begin && rep.norms[i] > rep.norms[i - 1] + 1e-6 * std::max(1.0, rep.norms[i - 1])) {
      non_increasing = false;
      rep.evidence.push_back("norm grows from " + std::to_string(rep.norms[i - 1]) + " to " +
                             std::to_string(rep.norms[i]) + " at lambda=" + std::to_string(path.rungs[i].lambda));
    }
    min_dist = std::min(min_dist, rep.distances[i]);
  }
  rep.nondegenerate = interior && non_increasing;
  rep.strongly = rep.nondegenerate && min_dist < 1e-3;
  if (rep.nondegenerate && !rep.strongly)
    rep.evidence.push_back("tail rungs stay at distance >= " + std::to_string(min_dist) + " from the feasible set");
  return rep;
}

/// True when at least three consecutive infeasible rungs move strictly away
/// from the feasible set.
inline bool detect_escape(const PenaltyPath& path, const FeasibleDistance& dist, double feas_tol = kPathFeasTol) {
  int run = 0;
  double prev = 0.0;
  for (const Rung& r : path.rungs) {
    if (r.phi_val <= feas_tol) {
      run = 0;
      continue;
    }
    const double d = dist(r.x);
    run = (run > 0 && d > prev * (1.0 + 1e-9) + 1e-12) ? run + 1 : 1;
    prev = d;
    if (run >= 3) return true;
  }
  return false;
}

enum class GlobalVerdict { exact, not_exact, inconclusive };

inline const char* to_string(GlobalVerdict v) {
  switch (v) {
    case GlobalVerdict::exact:
      return "exact";
    case GlobalVerdict::not_exact:
      return "not_exact";
    case GlobalVerdict::inconclusive:
      return "inconclusive";
  }
  return "";
}

struct GlobalOptions {
  std::size_t n_samples = 4096;
  std::uint64_t seed = 0;
  /// Empty selects {1, 2, 4, ..., 128}.
  std::vector<double> ladder;
  /// Region scale factors for the growing-region sup sequence.
  std::vector<double> expansion_factors{1.0, 10.0, 100.0};
  /// NaN selects 2 max{1, λ*(C)} and half the largest sampled φ.
  double mu = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  MinimizeOptions inner;
};

/// Global exactness evidence, certified only on the named region.
struct ExactnessReport {
  GlobalVerdict verdict = GlobalVerdict::inconclusive;
  std::string region;
  double fstar = 0.0;
  double lambda_star_lower = 0.0;
  SupEstimate sup;
  SupEstimate expanding;
  struct {
    double delta = 0.0;
    double lambda_star_on_set = 0.0;
    bool bounded = false;
  } omega_delta;
  std::optional<double> lemma_bound;
  double lemma_c = 0.0;
  double lemma_mu = 0.0;
  PenaltyPath path{{}, std::nullopt, Region::interval(0.0, 1.0)};
  bool escape = false;
  bool nondegenerate = false;
  bool strongly_nondegenerate = false;
  std::vector<std::string> evidence;
  std::vector<Point> witnesses;
};

inline ExactnessReport assess_global_exactness(const ConstrainedProblem& problem, const Region& region,
                                               const GlobalOptions& options = {}) {
  ExactnessReport rep;
  rep.path = PenaltyPath{{}, std::nullopt, region};
  rep.region = region.describe();
  rep.fstar = detail::resolve_fstar(problem, region, std::nullopt);
  rep.sup = lambda_star_sup(problem, region, options.n_samples, options.seed, rep.fstar);
  rep.lambda_star_lower = std::max(0.0, rep.sup.lower_bound);
  if (rep.sup.witness) rep.witnesses.push_back(*rep.sup.witness);

  std::vector<Region> grown;
  for (double s : options.expansion_factors) grown.push_back(region.scaled(s));
  rep.expanding = lambda_star_sup_expanding(problem, grown, options.n_samples, options.seed, rep.fstar);

  std::vector<double> ladder = options.ladder;
  if (ladder.empty())
    for (int k = 0; k < 8; ++k) ladder.push_back(std::ldexp(1.0, k));
  MinimizeOptions inner = options.inner;
  inner.seed = options.seed;
  rep.path = build_penalty_path(problem, ladder, region, inner);
  rep.path.fstar = rep.fstar;
  const FeasibleDistance dist(problem, region, options.seed);
  rep.escape = detect_escape(rep.path, dist);
  if (rep.path.rungs.size() >= 4) {
    const NondegeneracyReport nd = nondegeneracy_diagnostic(rep.path, problem);
    // The diagnostic reads only the tail; an escape earlier on the path
    // already falsifies non-degeneracy.
    rep.nondegenerate = nd.nondegenerate && !rep.escape;
    rep.strongly_nondegenerate = nd.strongly && !rep.escape;
    rep.evidence.insert(rep.evidence.end(), nd.evidence.begin(), nd.evidence.end());
  }

  double max_phi = 0.0;
  for (const Point& x : sample_cloud(region, options.n_samples, options.seed))
    if (problem.in_ambient(x)) max_phi = std::max(max_phi, problem.phi(x));
  const double mu = std::isnan(options.mu) ? 2.0 * std::max(1.0, rep.lambda_star_lower) : options.mu;
  const double delta = std::isnan(options.delta) ? 0.5 * max_phi : options.delta;
  if (delta > 0.0) {
    LemmaOptions lo;
    lo.n_samples = options.n_samples;
    lo.seed = options.seed;
    lo.inner = inner;
    const LemmaBound lb = lemma_exactness_bound(problem, mu, delta, region, rep.fstar, lo);
    rep.lemma_bound = lb.bound;
    rep.lemma_c = lb.c;
    rep.lemma_mu = mu;
    rep.omega_delta.delta = delta;
    rep.omega_delta.lambda_star_on_set = lb.lambda_star_omega_delta;
    rep.omega_delta.bounded = omega_delta(problem, delta, region, options.n_samples, options.seed).bounded_within_region;
  }

  if (rep.sup.verdict == SupVerdict::diverging) {
    rep.verdict = GlobalVerdict::not_exact;
    rep.evidence.push_back("sup ratio keeps doubling under cloud refinement");
  } else if (rep.escape && rep.expanding.verdict == SupVerdict::diverging) {
    rep.verdict = GlobalVerdict::not_exact;
    rep.evidence.push_back("penalty minimizers escape from the feasible set and the sup ratio doubles on growing regions");
    if (rep.expanding.witness) rep.witnesses.push_back(*rep.expanding.witness);
  } else if (rep.sup.verdict == SupVerdict::inconclusive) {
    rep.verdict = GlobalVerdict::inconclusive;
    rep.evidence.push_back("no infeasible samples in the region");
  } else {
    const double lam = 1.01 * rep.lambda_star_lower + 1e-6;
    const ExactOnSetCheck chk = check_exact_on_set(problem, region, lam, rep.fstar, options.n_samples, options.seed + 1);
    const bool lemma_ok = rep.lemma_bound && std::isfinite(*rep.lemma_bound);
    if (chk.exact && lemma_ok) {
      rep.verdict = GlobalVerdict::exact;
      rep.evidence.push_back("F_lambda >= f* on a fresh sample at lambda=" + std::to_string(lam));
    } else {
      rep.verdict = GlobalVerdict::inconclusive;
      if (!chk.exact) rep.evidence.push_back("fresh sample violates F_lambda >= f* at lambda=" + std::to_string(lam));
    }
  }
  return rep;
}

}  // namespace exactpen
