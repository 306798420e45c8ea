#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <exactpen/exactpen.hpp>

namespace exactpen::testing {

/// One-dimensional problem from scalar f and φ.
inline ConstrainedProblem scalar_problem(std::function<double(double)> f, std::function<double(double)> phi,
                                         Region region = Region::interval(-3.0, 3.0), std::string name = "scalar") {
  ConstrainedProblem p(
      1, [f](std::span<const double> x) { return ExtReal(f(x[0])); },
      [phi](std::span<const double> x) { return phi(x[0]); }, std::move(region));
  p.name = std::move(name);
  return p;
}

inline double positive_part(double x) { return std::max(0.0, x); }

/// f ≡ 0 with φ = max(0, x).
inline ConstrainedProblem zero_objective() {
  return scalar_problem([](double) { return 0.0; }, positive_part, Region::interval(-3.0, 3.0), "zero");
}

/// Minimum of g on a uniform grid of `count` points over [lo, hi].
inline double grid_min(const std::function<double(double)>& g, double lo, double hi, int count = 200001) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) best = std::min(best, g(lo + (hi - lo) * i / (count - 1)));
  return best;
}

/// Argmin of g on the same grid.
inline double grid_argmin(const std::function<double(double)>& g, double lo, double hi, int count = 200001) {
  double best = std::numeric_limits<double>::infinity();
  double arg = lo;
  for (int i = 0; i < count; ++i) {
    const double x = lo + (hi - lo) * i / (count - 1);
    if (g(x) < best) {
      best = g(x);
      arg = x;
    }
  }
  return arg;
}

}  // namespace exactpen::testing
