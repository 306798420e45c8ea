#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "exactpen/errors.hpp"
#include "exactpen/geometry.hpp"

namespace exactpen {

/// Shrinking-shell sampling plan used by every limsup / liminf estimator.
///
/// Shell j is the annulus r_{j+1} < d(y, x) <= r_j with r_j = r0 * decay^j.
/// The estimators aggregate over the last ceil(J/3) shells (the tail).
struct SamplingSchedule {
  double r0 = 1.0;
  double decay = 0.5;
  int shells = 20;
  /// 0 selects 64 * dim.
  int samples_per_shell = 0;
  std::uint64_t seed = 0;

  /// Defaults for the local exactness estimators.
  static SamplingSchedule local_default() { return {}; }

  /// Defaults for descent-rate estimation: a smaller outer radius keeps the
  /// tail shells well below the curvature scale of smooth pieces.
  static SamplingSchedule descent_default() {
    SamplingSchedule s;
    s.r0 = 1e-2;
    return s;
  }

  void validate() const {
    if (!(r0 > 0.0) || !std::isfinite(r0)) throw ConfigurationError("SamplingSchedule: r0 must be positive");
    if (!(decay > 0.0 && decay < 1.0)) throw ConfigurationError("SamplingSchedule: decay must lie in (0,1)");
    if (shells < 3) throw ConfigurationError("SamplingSchedule: need at least 3 shells");
    if (samples_per_shell != 0 && samples_per_shell < 8)
      throw ConfigurationError("SamplingSchedule: need at least 8 samples per shell");
  }

  [[nodiscard]] double radius(int j) const { return r0 * std::pow(decay, j); }

  [[nodiscard]] int samples(std::size_t dim) const {
    return samples_per_shell > 0 ? samples_per_shell : static_cast<int>(64 * dim);
  }

  [[nodiscard]] int tail_size() const { return (shells + 2) / 3; }
  [[nodiscard]] int tail_begin() const { return shells - tail_size(); }
};

/// Unit direction in the given norm: the first 2n samples of every shell are
/// the signed coordinate axes, the rest are random.
inline Point shell_direction(std::size_t dim, int k, Norm norm_kind, Rng& rng) {
  Point u(dim, 0.0);
  if (static_cast<std::size_t>(k) < 2 * dim) {
    u[static_cast<std::size_t>(k) / 2] = (k % 2 == 0) ? 1.0 : -1.0;
    return u;
  }
  for (double& v : u) v = rng.normal();
  const double len = norm(u, norm_kind);
  if (len == 0.0) {
    u[0] = 1.0;
    return u;
  }
  for (double& v : u) v /= len;
  return u;
}

struct ShellSample {
  Point y;
  double dist = 0.0;
};

/// Sample k of shell j around x: a pure function of (seed, x, j, k).
inline ShellSample shell_sample(std::span<const double> x, const SamplingSchedule& schedule, int j, int k,
                                Norm norm_kind = Norm::euclidean) {
  Rng rng = Rng::keyed(schedule.seed, hash_point(x), static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k));
  const double outer = schedule.radius(j);
  const double inner = schedule.radius(j + 1);
  double rho = rng.uniform(inner, outer);
  if (rho <= inner) rho = outer;
  Point u = shell_direction(x.size(), k, norm_kind, rng);
  ShellSample s;
  s.y.assign(x.begin(), x.end());
  for (std::size_t i = 0; i < u.size(); ++i) s.y[i] += rho * u[i];
  s.dist = distance(s.y, x, norm_kind);
  return s;
}

}  // namespace exactpen
