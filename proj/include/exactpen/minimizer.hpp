#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/ext_real.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/parallel.hpp"
#include "exactpen/problem.hpp"

namespace exactpen {

enum class InnerStatus { converged, budget_exhausted };

inline const char* to_string(InnerStatus s) {
  return s == InnerStatus::converged ? "converged" : "budget_exhausted";
}

/// Multistart derivative-free minimization over A ∩ region.
///
/// Seeds come from a grid (up to three axes) with at least 64 and at least
/// lhs_points^(1/dim) points per axis, or a 4096-point Latin hypercube plus
/// dense lines along each axis through the region center.
/// The best `starts` seeds, the discrete local minima of the grid or lines and
/// any warm starts are polished by a coordinatewise pattern search
/// whose step is halved on failure.
struct MinimizeOptions {
  /// Number of local descents; 0 selects 16 * dim.
  std::size_t starts = 0;
  std::size_t grid_per_axis = 64;
  std::size_t lhs_points = 4096;
  /// Points per axis line when there is no full grid.
  std::size_t line_points = 4096;
  double min_step = 1e-10;
  /// Evaluation cap per descent; 0 selects 20000 + 4000 * dim.
  std::size_t max_evals_per_start = 0;
  std::uint64_t seed = 0;
  std::vector<Point> warm_starts;
};

struct MinimizeResult {
  bool found = false;
  Point x;
  ExtReal value = ExtReal::infinity();
  InnerStatus status = InnerStatus::converged;
  std::size_t evaluations = 0;
};

struct DescentResult {
  Point x;
  ExtReal value = ExtReal::infinity();
  InnerStatus status = InnerStatus::converged;
  std::size_t evaluations = 0;
};

/// Coordinatewise pattern search from a finite start, confined to the region.
/// When no coordinate move improves (a kink not aligned with the axes, such as
/// the ridge of an exact penalty along a curved constraint), the last
/// successful oblique direction and up to min(2n, 8) random unit directions are polled
/// before the steps are halved. Directions are keyed by the start point.
template <typename Objective>
DescentResult pattern_search(const Objective& objective, const Region& region, const Predicate& ambient, Point x,
                             std::span<const double> initial_steps, double min_step, std::size_t max_evals) {
  DescentResult out;
  const std::size_t n = x.size();
  std::vector<double> step(initial_steps.begin(), initial_steps.end());
  ExtReal fx = objective(x);
  out.evaluations = 1;
  Rng rng = Rng::keyed(hash_point(x), 0x9011ULL);
  Point memory;
  auto largest = [&] { return *std::max_element(step.begin(), step.end()); };
  auto accept = [&](Point y) {
    y = region.project(std::move(y));
    if (y == x) return false;
    if (ambient && !ambient(y)) return false;
    const ExtReal fy = objective(y);
    ++out.evaluations;
    if (!(fy < fx)) return false;
    x = std::move(y);
    fx = fy;
    return true;
  };
  auto oblique = [&](const Point& d) {
    for (double sign : {1.0, -1.0}) {
      Point y = x;
      for (std::size_t i = 0; i < n; ++i) y[i] += sign * step[i] * d[i];
      if (accept(std::move(y))) {
        memory = d;
        if (sign < 0.0)
          for (double& v : memory) v = -v;
        return true;
      }
    }
    return false;
  };
  while (largest() >= min_step) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (step[i] <= 0.0) continue;
      for (double sign : {1.0, -1.0}) {
        Point y = x;
        y[i] += sign * step[i];
        if (accept(std::move(y))) {
          improved = true;
          break;
        }
      }
    }
    if (!improved && n >= 2) {
      improved = !memory.empty() && oblique(memory);
      // Capped so high-dimensional runs stay near the cost of one sweep.
      const std::size_t polls = std::min<std::size_t>(2 * n, 8);
      for (std::size_t k = 0; k < polls && !improved; ++k) {
        Point d(n);
        for (double& v : d) v = rng.normal();
        const double len = norm(d);
        if (!(len > 0.0)) continue;
        for (double& v : d) v /= len;
        improved = oblique(d);
      }
    }
    if (!improved)
      for (double& s : step) s *= 0.5;
    if (out.evaluations >= max_evals) {
      out.status = InnerStatus::budget_exhausted;
      break;
    }
  }
  out.x = std::move(x);
  out.value = fx;
  return out;
}

namespace detail {

struct Seed {
  Point x;
  ExtReal value;
};

inline bool seed_less(const Seed& a, const Seed& b) {
  if (a.value != b.value) return a.value < b.value;
  return lex_less(a.x, b.x);
}

// Grid seeds, plus the discrete local minima of the grid (finite values no
// larger than any finite axis neighbour) in `basins`.
template <typename Objective>
std::vector<Seed> grid_seeds(const Objective& objective, const Region& region, const Predicate& ambient,
                             std::size_t per_axis, std::vector<Seed>& basins, std::size_t& evaluations) {
  per_axis = std::max<std::size_t>(per_axis, 2);
  const std::size_t n = region.dim();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= per_axis;
  std::vector<ExtReal> values(total, ExtReal::infinity());
  std::vector<Point> points(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point x(n);
    std::size_t rest = flat;
    for (std::size_t i = n; i-- > 0;) {
      const std::size_t k = rest % per_axis;
      rest /= per_axis;
      const double t = static_cast<double>(k) / static_cast<double>(per_axis - 1);
      x[i] = k + 1 == per_axis ? region.upper()[i] : region.lower()[i] + t * (region.upper()[i] - region.lower()[i]);
    }
    if (region.contains(x) && (!ambient || ambient(x))) {
      values[flat] = objective(x);
      ++evaluations;
    }
    points[flat] = std::move(x);
  }
  std::vector<Seed> seeds;
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (values[flat].is_infinite()) continue;
    bool basin = true;
    std::size_t stride = 1;
    for (std::size_t i = n; i-- > 0 && basin;) {
      const std::size_t k = (flat / stride) % per_axis;
      if (k > 0 && values[flat - stride] < values[flat]) basin = false;
      if (k + 1 < per_axis && values[flat + stride] < values[flat]) basin = false;
      stride *= per_axis;
    }
    if (basin) basins.push_back({points[flat], values[flat]});
    seeds.push_back({std::move(points[flat]), values[flat]});
  }
  return seeds;
}

// Grids along each coordinate axis through the region center. Thin features
// aligned with an axis are invisible to a space-filling design in high
// dimension but show up on these lines. Strict line minima go to `basins`.
template <typename Objective>
std::vector<Seed> axis_line_seeds(const Objective& objective, const Region& region, const Predicate& ambient,
                                  std::size_t per_axis, std::vector<Seed>& basins, std::size_t& evaluations) {
  per_axis = std::max<std::size_t>(per_axis, 3);
  const std::size_t n = region.dim();
  std::vector<Seed> seeds;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Seed> line;
    for (std::size_t k = 0; k < per_axis; ++k) {
      Point x = region.center();
      const double t = static_cast<double>(k) / static_cast<double>(per_axis - 1);
      x[i] = k + 1 == per_axis ? region.upper()[i] : region.lower()[i] + t * (region.upper()[i] - region.lower()[i]);
      ExtReal v = ExtReal::infinity();
      if (region.contains(x) && (!ambient || ambient(x))) {
        v = objective(x);
        ++evaluations;
      }
      line.push_back({std::move(x), v});
    }
    for (std::size_t k = 0; k < per_axis; ++k) {
      if (line[k].value.is_infinite()) continue;
      const bool below_left = k == 0 || line[k].value < line[k - 1].value;
      const bool below_right = k + 1 == per_axis || line[k].value < line[k + 1].value;
      if (below_left && below_right) basins.push_back(line[k]);
      seeds.push_back(std::move(line[k]));
    }
  }
  return seeds;
}

}  // namespace detail

template <typename Objective>
MinimizeResult minimize(const Objective& objective, const Region& region, const Predicate& ambient,
                        const MinimizeOptions& options) {
  const std::size_t n = region.dim();
  const bool use_grid = n <= 3;
  using detail::Seed;
  MinimizeResult result;
  std::vector<Seed> seeds;
  std::vector<Seed> basins;
  // Low dimensions spend the hypercube budget on the grid: a coarse 1-D grid
  // over a long interval steps over narrow basins.
  std::size_t per_axis = std::max<std::size_t>(options.grid_per_axis, 2);
  if (use_grid) {
    std::size_t m = per_axis;
    auto fits = [&](std::size_t k) {
      std::size_t total = 1;
      for (std::size_t i = 0; i < n; ++i) total *= k;
      return total <= options.lhs_points;
    };
    while (fits(m + 1)) ++m;
    per_axis = m;
    seeds = detail::grid_seeds(objective, region, ambient, per_axis, basins, result.evaluations);
  } else {
    for (Point& x : latin_hypercube(region, options.lhs_points, options.seed)) {
      if (ambient && !ambient(x)) continue;
      const ExtReal v = objective(x);
      ++result.evaluations;
      if (v.is_finite()) seeds.push_back({std::move(x), v});
    }
    for (Seed& s : detail::axis_line_seeds(objective, region, ambient, options.line_points, basins,
                                           result.evaluations))
      seeds.push_back(std::move(s));
  }
  std::sort(seeds.begin(), seeds.end(), detail::seed_less);
  std::sort(basins.begin(), basins.end(), detail::seed_less);

  const std::size_t wanted = options.starts > 0 ? options.starts : 16 * n;
  std::vector<Point> starts;
  for (const Point& w : options.warm_starts) {
    if (w.size() != n) throw DimensionError("minimize: warm start dimension mismatch");
    Point p = region.project(w);
    if (ambient && !ambient(p)) continue;
    if (objective(p).is_finite()) starts.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < seeds.size() && i < wanted; ++i) starts.push_back(seeds[i].x);
  // Every grid basin gets a descent too, so a good basin whose grid value is
  // poor is not lost to the value ranking.
  for (std::size_t i = 0; i < basins.size() && i < 4 * wanted; ++i)
    if (std::find(starts.begin(), starts.end(), basins[i].x) == starts.end()) starts.push_back(basins[i].x);
  if (starts.empty()) return result;

  std::vector<double> steps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double extent = region.upper()[i] - region.lower()[i];
    steps[i] = use_grid ? 2.0 * extent / static_cast<double>(per_axis - 1)
                        : 0.25 * extent;
  }
  const std::size_t budget = options.max_evals_per_start > 0 ? options.max_evals_per_start : 20000 + 4000 * n;

  std::vector<DescentResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) {
    runs[k] = pattern_search(objective, region, ambient, starts[k], steps, options.min_step, budget);
  });

  // Lowest value wins; among values within 1e-12 of it the lexicographically
  // smallest point is selected.
  ExtReal lowest = ExtReal::infinity();
  for (const DescentResult& r : runs) {
    result.evaluations += r.evaluations;
    lowest = std::min(lowest, r.value);
  }
  const DescentResult* best = nullptr;
  for (const DescentResult& r : runs) {
    const bool tied = lowest.is_infinite() ? r.value.is_infinite() : r.value.value() <= lowest.value() + 1e-12;
    if (tied && (!best || lex_less(r.x, best->x))) best = &r;
  }
  result.found = best->value.is_finite();
  result.x = best->x;
  result.value = best->value;
  result.status = best->status;
  return result;
}

}  // namespace exactpen
