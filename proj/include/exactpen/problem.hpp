#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/ext_real.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/modulus.hpp"

namespace exactpen {

using ScalarMap = std::function<double(std::span<const double>)>;
using ObjectiveMap = std::function<ExtReal(std::span<const double>)>;
using Predicate = std::function<bool(std::span<const double>)>;

/// Minimize f over Ω = {x ∈ A : φ(x) = 0}, with f extended-real valued and
/// φ a finite nonnegative penalty term. Immutable once built; every map must be
/// a deterministic pure function so instances can be shared across threads.
struct ConstrainedProblem {
  ConstrainedProblem(std::size_t dimension, ObjectiveMap f, ScalarMap phi, Region window)
      : dim(dimension), objective(std::move(f)), penalty_term(std::move(phi)), region(std::move(window)) {
    if (dim == 0) throw DimensionError("ConstrainedProblem: dimension must be >= 1");
    if (!objective || !penalty_term) throw ConfigurationError("ConstrainedProblem: objective and penalty term are required");
    if (region.dim() != dim) throw DimensionError("ConstrainedProblem: region dimension mismatch");
  }

  std::size_t dim;
  ObjectiveMap objective;
  ScalarMap penalty_term;
  /// Membership in A; empty means A = R^n.
  Predicate ambient;
  /// Default analysis window.
  Region region;
  /// Oracle for d(x, Ω) in the problem norm, if known.
  ScalarMap feasible_distance;
  std::optional<double> fstar_hint;
  Norm norm = Norm::euclidean;
  std::string name;
  std::string description;

  void check_point(std::span<const double> x) const {
    if (x.size() != dim)
      throw DimensionError("point has dimension " + std::to_string(x.size()) + ", problem '" + name + "' has " +
                           std::to_string(dim));
  }

  [[nodiscard]] ExtReal f(std::span<const double> x) const { return objective(x); }

  [[nodiscard]] double phi(std::span<const double> x) const {
    const double v = penalty_term(x);
    if (!(v >= 0.0) || !std::isfinite(v))
      throw PreconditionError("penalty term of '" + name + "' returned a negative or non-finite value");
    return v;
  }

  [[nodiscard]] bool in_ambient(std::span<const double> x) const { return !ambient || ambient(x); }

  [[nodiscard]] bool has_distance_oracle() const { return static_cast<bool>(feasible_distance); }
};

/// F_λ = f + λφ.
struct PenaltyFunction {
  ConstrainedProblem problem;
  double lambda = 0.0;

  PenaltyFunction(ConstrainedProblem p, double lam) : problem(std::move(p)), lambda(lam) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw PreconditionError("PenaltyFunction: lambda must be >= 0");
  }

  ExtReal operator()(std::span<const double> x) const {
    const ExtReal fx = problem.f(x);
    if (fx.is_infinite()) return fx;
    const double ph = problem.phi(x);
    // λφ with λ = 0 must not produce 0 * inf; φ is finite here anyway.
    return fx + ExtReal(lambda * ph);
  }
};

/// Evaluates F_λ(x) after checking the dimension.
inline ExtReal eval_penalized(const PenaltyFunction& pf, std::span<const double> x) {
  pf.problem.check_point(x);
  return pf(x);
}

/// Smooth nonlinear program: min f s.t. h_i = 0, g_j <= 0, x ∈ A.
struct NlpModel {
  NlpModel(std::size_t dimension, ScalarMap f, Region window)
      : dim(dimension), objective(std::move(f)), region(std::move(window)) {}

  std::size_t dim;
  ScalarMap objective;
  std::vector<ScalarMap> equalities;
  std::vector<ScalarMap> inequalities;
  Predicate ambient;
  Region region;
  std::string name = "nlp";

  void validate() const {
    if (dim == 0) throw DimensionError("NlpModel: dimension must be >= 1");
    if (!objective) throw ConfigurationError("NlpModel: objective missing");
    if (equalities.empty() && inequalities.empty())
      throw ConfigurationError("NlpModel: at least one equality or inequality constraint is required");
    if (region.dim() != dim) throw DimensionError("NlpModel: region dimension mismatch");
  }
};

namespace detail {

inline ConstrainedProblem problem_from_model(const NlpModel& model, ScalarMap phi, const char* kind) {
  model.validate();
  auto f = model.objective;
  ConstrainedProblem p(
      model.dim, [f](std::span<const double> x) { return ExtReal(f(x)); }, std::move(phi), model.region);
  p.ambient = model.ambient;
  p.name = model.name;
  p.description = std::string(kind) + " penalty of an NLP with " + std::to_string(model.equalities.size()) +
                  " equalities and " + std::to_string(model.inequalities.size()) + " inequalities";
  return p;
}

}  // namespace detail

/// φ(x) = Σ|h_i(x)| + Σ max{g_j(x), 0}.
inline ConstrainedProblem build_l1_penalty(const NlpModel& model) {
  auto eqs = model.equalities;
  auto ineqs = model.inequalities;
  auto phi = [eqs, ineqs](std::span<const double> x) {
    double acc = 0.0;
    for (const auto& h : eqs) acc += std::abs(h(x));
    for (const auto& g : ineqs) acc += std::max(g(x), 0.0);
    return acc;
  };
  return detail::problem_from_model(model, phi, "l1");
}

/// φ(x) = max{0, |h_1(x)|, ..., g_1(x), ...}.
inline ConstrainedProblem build_max_penalty(const NlpModel& model) {
  auto eqs = model.equalities;
  auto ineqs = model.inequalities;
  auto phi = [eqs, ineqs](std::span<const double> x) {
    double acc = 0.0;
    for (const auto& h : eqs) acc = std::max(acc, std::abs(h(x)));
    for (const auto& g : ineqs) acc = std::max(acc, g(x));
    return acc;
  };
  return detail::problem_from_model(model, phi, "max");
}

/// Replaces φ by η(d(·, Ω)) using the problem's distance oracle.
inline ConstrainedProblem build_distance_penalty(const ConstrainedProblem& problem, const RateModulus& eta) {
  if (!problem.has_distance_oracle())
    throw ConfigurationError("build_distance_penalty: problem '" + problem.name + "' has no distance oracle");
  ConstrainedProblem out = problem;
  auto dist = problem.feasible_distance;
  out.penalty_term = [dist, eta](std::span<const double> x) { return eta(dist(x)); };
  out.description = problem.description + " (penalty replaced by " + eta.describe() + " of the distance)";
  return out;
}

/// d(x, Ω): the problem's oracle when present, otherwise the distance to a
/// fixed cloud of feasible points found by rejection sampling in the region.
class FeasibleDistance {
 public:
  static constexpr double kFeasibleTol = 1e-10;
  static constexpr std::size_t kCloudSize = 4096;

  explicit FeasibleDistance(const ConstrainedProblem& problem, std::optional<Region> region = std::nullopt,
                            std::uint64_t seed = 0)
      : norm_(problem.norm) {
    if (problem.has_distance_oracle()) {
      oracle_ = problem.feasible_distance;
      return;
    }
    const Region window = region.value_or(problem.region);
    auto accept = [&](const Point& x) {
      if (cloud_.size() < kCloudSize && problem.in_ambient(x) && problem.phi(x) <= kFeasibleTol) cloud_.push_back(x);
    };
    if (window.dim() <= 3)
      for (const Point& x : sample_cloud(window, kCloudSize, seed)) accept(x);
    Rng rng = Rng::keyed(seed, 0xfea5ULL);
    for (std::size_t k = 0; k < kCloudSize * 256 && cloud_.size() < kCloudSize; ++k) accept(uniform_point(window, rng));
    if (cloud_.empty())
      throw ConfigurationError("no feasible point found in the region of '" + problem.name +
                               "'; a distance oracle is required");
  }

  double operator()(std::span<const double> x) const {
    if (oracle_) return oracle_(x);
    double best = std::numeric_limits<double>::infinity();
    for (const Point& c : cloud_) best = std::min(best, distance(x, c, norm_));
    return best;
  }

  [[nodiscard]] bool approximate() const { return !oracle_; }
  [[nodiscard]] std::size_t cloud_size() const { return cloud_.size(); }

 private:
  ScalarMap oracle_;
  std::vector<Point> cloud_;
  Norm norm_;
};

}  // namespace exactpen
