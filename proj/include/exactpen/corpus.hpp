#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/ext_real.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/global_analysis.hpp"
#include "exactpen/problem.hpp"

namespace exactpen::corpus {

using Params = std::map<std::string, double>;

struct LocalTruth {
  Point x;
  /// λ*(x); nullopt when λ̄(x) diverges.
  std::optional<double> lambda_star;
  std::string provenance;
};

struct RegionTruth {
  Region region;
  GlobalVerdict verdict;
  std::optional<double> lambda_star;
  std::string provenance;
};

struct GroundTruth {
  std::optional<double> fstar;
  std::vector<LocalTruth> local;
  std::vector<RegionTruth> global;
  /// Closed-form inf F_λ over A, where known (may be valid only for a range of λ).
  std::function<std::optional<double>(double)> min_value;
  /// A closed-form point of G(λ), where known.
  std::function<std::optional<Point>(double)> minimizer;
  std::string provenance;
};

struct CorpusInstance {
  std::string id;
  ConstrainedProblem problem;
  GroundTruth truth;
};

inline const std::vector<std::string>& ids() {
  static const std::vector<std::string> all{"example_1d",   "stairs",       "l2_not_strong_reg", "l2_unbounded_local",
                                            "l2_not_lip",   "convex_slater", "sqrt_noncalm"};
  return all;
}

// ---- closed forms ----------------------------------------------------------

inline double example_1d_f(double x) { return x <= 0.0 ? -x : -(x + 1.0) * (x + 1.0) + 1.0; }

/// Staircase: -x up to 1; on ((n-1)^2, n^2] a ramp from -1/(n-1) to -1/n over
/// the first unit, then flat at -1/n.
inline double stairs_f(double x) {
  if (x <= 1.0) return -x;
  auto n = static_cast<long long>(std::ceil(std::sqrt(x)));
  while (n > 2 && static_cast<double>((n - 1) * (n - 1)) >= x) --n;
  while (static_cast<double>(n * n) < x) ++n;
  const auto m = static_cast<double>(n - 1);
  const auto nd = static_cast<double>(n);
  if (x <= m * m + 1.0) return -1.0 / m + (1.0 / m - 1.0 / nd) * (x - m * m);
  return -1.0 / nd;
}

inline double stairs_phi(double x) {
  if (x <= 0.0) return 0.0;
  return x <= 1.0 ? x : 1.0 / x;
}

/// min over 1 <= n <= N of term(n), and 0 (the value at feasible points).
inline double min_over_n(std::size_t N, const std::function<double(double)>& term) {
  double best = 0.0;
  for (std::size_t n = 1; n <= N; ++n) best = std::min(best, term(static_cast<double>(n)));
  return best;
}

inline std::size_t argmin_over_n(std::size_t N, const std::function<double(double)>& term) {
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double v = term(static_cast<double>(n));
    if (v < best) {
      best = v;
      arg = n;
    }
  }
  return arg;
}

namespace detail {

inline double euclid(std::span<const double> x) { return norm(x); }

inline std::size_t dimension_param(const Params& params) {
  double N = 50;
  for (const auto& [k, v] : params) {
    if (k != "N") throw ConfigurationError("unknown parameter '" + k + "' (only N is accepted)");
    N = v;
  }
  if (!(N >= 2) || N != std::floor(N) || N > 100000)
    throw ConfigurationError("parameter N must be an integer >= 2");
  return static_cast<std::size_t>(N);
}

inline void no_params(const std::string& id, const Params& params) {
  if (!params.empty()) throw ConfigurationError("instance '" + id + "' takes no parameters");
}

inline ConstrainedProblem one_dim(const std::string& id, std::function<double(double)> f,
                                  std::function<double(double)> phi, Region region, double fstar,
                                  std::string description) {
  ConstrainedProblem p(
      1, [f](std::span<const double> x) { return ExtReal(f(x[0])); },
      [phi](std::span<const double> x) { return phi(x[0]); }, std::move(region));
  p.feasible_distance = [](std::span<const double> x) { return std::max(0.0, x[0]); };
  p.fstar_hint = fstar;
  p.name = id;
  p.description = std::move(description);
  return p;
}

inline Point unit(std::size_t N, std::size_t n, double value) {
  Point x(N, 0.0);
  x[n - 1] = value;
  return x;
}

}  // namespace detail

// ---- instances -------------------------------------------------------------

inline CorpusInstance example_1d(const Params& params = {}) {
  detail::no_params("example_1d", params);
  CorpusInstance c{"example_1d",
                   detail::one_dim(
                       "example_1d", example_1d_f, [](double x) { return std::max(0.0, x); },
                       Region::interval(-3.0, 3.0), 0.0,
                       "f = -x on x <= 0, 1 - (x+1)^2 on x > 0; phi = max(0, x)"),
                   {}};
  c.truth.fstar = 0.0;
  c.truth.local.push_back({{0.0}, 2.0, "one-sided ratios: (x+2) -> 2 as x -> 0+"});
  c.truth.global.push_back({Region::interval(-3.0, 3.0), GlobalVerdict::exact, 5.0,
                            "sup of ((x+1)^2 - 1)/x = x + 2 over (0, 3]"});
  c.truth.min_value = [](double) -> std::optional<double> { return std::nullopt; };
  c.truth.minimizer = [](double) -> std::optional<Point> { return std::nullopt; };
  c.truth.provenance = "F_lambda is unbounded below on R for every lambda (quadratic vs linear)";
  return c;
}

inline CorpusInstance stairs(const Params& params = {}) {
  detail::no_params("stairs", params);
  CorpusInstance c{"stairs",
                   detail::one_dim("stairs", stairs_f, stairs_phi, Region::interval(-1.0, 500.0), 0.0,
                                   "piecewise-linear staircase f; phi = x on (0,1], 1/x on [1, inf)"),
                   {}};
  c.truth.fstar = 0.0;
  c.truth.local.push_back({{0.0}, 1.0, "f = -x and phi = x on (0, 1]"});
  c.truth.global.push_back({Region::interval(-1.0, 500.0), GlobalVerdict::not_exact, std::nullopt,
                            "minimizers x = 4k^2 of F_k escape to infinity"});
  // Plateau right ends n^2 carry F = -1/n + λ/n^2; ramps and (0,1] are worse for λ >= 1.
  c.truth.min_value = [](double lambda) -> std::optional<double> {
    if (lambda < 1.0) return std::nullopt;
    const auto n = std::max(2.0, std::round(2.0 * lambda));
    double best = 0.0;
    for (double k : {n - 1.0, n, n + 1.0})
      if (k >= 2.0) best = std::min(best, -1.0 / k + lambda / (k * k));
    return best;
  };
  c.truth.minimizer = [](double lambda) -> std::optional<Point> {
    const double k = std::round(lambda);
    if (k != lambda || k < 2.0) return std::nullopt;
    return Point{4.0 * k * k};
  };
  c.truth.provenance = "G(k) = {4k^2} with value -1/(4k) for integer k >= 2";
  return c;
}

inline CorpusInstance l2_not_strong_reg(const Params& params = {}) {
  const std::size_t N = detail::dimension_param(params);
  ConstrainedProblem p(
      N,
      [](std::span<const double> x) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double s = x[i] >= 1.0 ? std::min(x[i], 2.0) : 0.0;
          f = std::min(f, -s / static_cast<double>(i + 1));
        }
        return ExtReal(f);
      },
      [](std::span<const double> x) {
        double phi = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const auto n = static_cast<double>(i + 1);
          phi += std::abs(x[i]) / (n * n);
        }
        return phi;
      },
      Region::cube(N, -3.0, 3.0));
  p.feasible_distance = detail::euclid;
  p.fstar_hint = 0.0;
  p.name = "l2_not_strong_reg";
  p.description = "truncation to R^" + std::to_string(N) + " of a non strongly non-degenerate l2 example";
  CorpusInstance c{"l2_not_strong_reg", std::move(p), {}};
  c.truth.fstar = 0.0;
  c.truth.local.push_back({Point(N, 0.0), 0.0, "f vanishes on a neighbourhood of 0"});
  auto term = [](double lambda) { return [lambda](double n) { return 2.0 * lambda / (n * n) - 2.0 / n; }; };
  c.truth.min_value = [N, term](double lambda) -> std::optional<double> { return min_over_n(N, term(lambda)); };
  c.truth.minimizer = [N, term](double lambda) -> std::optional<Point> {
    const std::size_t n = argmin_over_n(N, term(lambda));
    return n == 0 ? Point(N, 0.0) : detail::unit(N, n, 2.0);
  };
  c.truth.provenance = "min F_lambda = min over n <= N of 2 lambda/n^2 - 2/n, attained at 2 e_n (norm 2)";
  return c;
}

inline CorpusInstance l2_unbounded_local(const Params& params = {}) {
  const std::size_t N = detail::dimension_param(params);
  ConstrainedProblem p(
      N,
      [](std::span<const double> x) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const auto n = static_cast<double>(i + 1);
          f = std::min(f, std::min(0.0, std::max(-n * (x[i] - 1.0), -1.0 / n)));
        }
        return ExtReal(f);
      },
      [](std::span<const double> x) { return std::max(norm(x) - 1.0, 0.0); }, Region::cube(N, -3.0, 3.0));
  p.feasible_distance = [](std::span<const double> x) { return std::max(norm(x) - 1.0, 0.0); };
  p.fstar_hint = 0.0;
  p.name = "l2_unbounded_local";
  p.description = "truncation to R^" + std::to_string(N) + " of the unit-ball l2 example with unbounded local parameters";
  CorpusInstance c{"l2_unbounded_local", std::move(p), {}};
  c.truth.fstar = 0.0;
  for (std::size_t n : {1UL, 2UL, 5UL, 10UL})
    if (n <= N) c.truth.local.push_back({detail::unit(N, n, 1.0), static_cast<double>(n), "ratio n along e_n"});
  auto term = [](double lambda) { return [lambda](double n) { return -1.0 / n + lambda / (n * n); }; };
  c.truth.min_value = [N, term](double lambda) -> std::optional<double> { return min_over_n(N, term(lambda)); };
  c.truth.minimizer = [N, term](double lambda) -> std::optional<Point> {
    const std::size_t n = argmin_over_n(N, term(lambda));
    if (n == 0) return Point(N, 0.0);
    const auto nd = static_cast<double>(n);
    return detail::unit(N, n, 1.0 + 1.0 / (nd * nd));
  };
  c.truth.provenance = "min F_lambda = min over lambda <= n <= N of -1/n + lambda/n^2 at (1 + 1/n^2) e_n";
  return c;
}

inline CorpusInstance l2_not_lip(const Params& params = {}) {
  const std::size_t N = detail::dimension_param(params);
  // Coordinates beyond N are zero and contribute s_n(0) = 0, hence min with 0.
  ConstrainedProblem p(
      N,
      [](std::span<const double> x) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const auto n = static_cast<double>(i + 1);
          const double s = x[i] <= 1.0 ? std::max(0.0, (2.0 * x[i] - 1.0) / n)
                                       : std::max(-n * (x[i] - 1.0) + 1.0 / n, -1.0 / n);
          f = std::min(f, s);
        }
        return ExtReal(f);
      },
      [](std::span<const double> x) { return std::max(norm(x) - 1.0, 0.0); }, Region::cube(N, -3.0, 3.0));
  p.feasible_distance = [](std::span<const double> x) { return std::max(norm(x) - 1.0, 0.0); };
  p.fstar_hint = 0.0;
  p.name = "l2_not_lip";
  p.description = "truncation to R^" + std::to_string(N) + " of the l2 example whose f is not Lipschitz near solutions";
  CorpusInstance c{"l2_not_lip", std::move(p), {}};
  c.truth.fstar = 0.0;
  c.truth.local.push_back({Point(N, 0.0), 0.0, "0 is a local minimizer of f itself"});
  auto term = [](double lambda) { return [lambda](double n) { return -1.0 / n + 2.0 * lambda / (n * n); }; };
  c.truth.min_value = [N, term](double lambda) -> std::optional<double> { return min_over_n(N, term(lambda)); };
  c.truth.minimizer = [N, term](double lambda) -> std::optional<Point> {
    const std::size_t n = argmin_over_n(N, term(lambda));
    if (n == 0) return Point(N, 0.0);
    const auto nd = static_cast<double>(n);
    return detail::unit(N, n, 1.0 + 2.0 / (nd * nd));
  };
  c.truth.provenance = "min F_lambda = min over 2 lambda <= n <= N of -1/n + 2 lambda/n^2 at (1 + 2/n^2) e_n";
  return c;
}

inline NlpModel convex_slater_model() {
  NlpModel m(
      2, [](std::span<const double> x) { return (x[0] - 2.0) * (x[0] - 2.0) + x[1] * x[1]; },
      Region::cube(2, -3.0, 3.0));
  m.inequalities.emplace_back([](std::span<const double> x) { return x[0]; });
  m.name = "convex_slater";
  return m;
}

inline CorpusInstance convex_slater(const Params& params = {}) {
  detail::no_params("convex_slater", params);
  ConstrainedProblem p = build_l1_penalty(convex_slater_model());
  p.feasible_distance = [](std::span<const double> x) { return std::max(0.0, x[0]); };
  p.fstar_hint = 4.0;
  p.description = "min |x - (2,0)|^2 s.t. x1 <= 0, l1 penalty";
  CorpusInstance c{"convex_slater", std::move(p), {}};
  c.truth.fstar = 4.0;
  c.truth.local.push_back({{0.0, 0.0}, 4.0, "ratio 4 - x1 - x2^2/x1 -> 4"});
  c.truth.global.push_back({Region::cube(2, -3.0, 3.0), GlobalVerdict::exact, 4.0,
                            "sup over x1 > 0 of 4 - x1 - x2^2/x1 is 4"});
  c.truth.min_value = [](double lambda) -> std::optional<double> {
    // For λ < 4 the unconstrained branch minimizer is x1 = 2 - λ/2 > 0.
    if (lambda >= 4.0) return 4.0;
    const double x1 = 2.0 - 0.5 * lambda;
    return (x1 - 2.0) * (x1 - 2.0) + lambda * x1;
  };
  c.truth.minimizer = [](double lambda) -> std::optional<Point> {
    if (lambda >= 4.0) return Point{0.0, 0.0};
    return Point{2.0 - 0.5 * lambda, 0.0};
  };
  c.truth.provenance = "convex QP; F_lambda minimized in closed form on each branch";
  return c;
}

inline CorpusInstance sqrt_noncalm(const Params& params = {}) {
  detail::no_params("sqrt_noncalm", params);
  CorpusInstance c{"sqrt_noncalm",
                   detail::one_dim(
                       "sqrt_noncalm", [](double x) { return -std::sqrt(std::max(0.0, x)); },
                       [](double x) { return std::max(0.0, x); }, Region::interval(-1.0, 3.0), 0.0,
                       "f = -sqrt(max(0, x)); phi = max(0, x)"),
                   {}};
  c.truth.fstar = 0.0;
  c.truth.local.push_back({{0.0}, std::nullopt, "ratio x^(-1/2) diverges"});
  c.truth.global.push_back({Region::interval(-1.0, 3.0), GlobalVerdict::not_exact, std::nullopt,
                            "not exact at the unique solution 0"});
  c.truth.min_value = [](double) -> std::optional<double> { return std::nullopt; };
  c.truth.minimizer = [](double) -> std::optional<Point> { return std::nullopt; };
  c.truth.provenance = "h(p) = -sqrt(p), not calm from below";
  return c;
}

/// Builds a corpus instance by id.
inline CorpusInstance load(const std::string& id, const Params& params = {}) {
  if (id == "example_1d") return example_1d(params);
  if (id == "stairs") return stairs(params);
  if (id == "l2_not_strong_reg") return l2_not_strong_reg(params);
  if (id == "l2_unbounded_local") return l2_unbounded_local(params);
  if (id == "l2_not_lip") return l2_not_lip(params);
  if (id == "convex_slater") return convex_slater(params);
  if (id == "sqrt_noncalm") return sqrt_noncalm(params);
  throw ConfigurationError("unknown corpus instance '" + id + "'");
}

}  // namespace exactpen::corpus
