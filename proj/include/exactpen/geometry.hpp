#pragma once

#include <algorithm>
#include <cstring>
#include <limits>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "exactpen/errors.hpp"

namespace exactpen {

/// A point of R^n. Dimension is fixed per problem and checked at the
/// problem boundary, not here.
using Point = std::vector<double>;

enum class Norm { euclidean, max };

inline double norm(std::span<const double> x, Norm kind = Norm::euclidean) {
  double acc = 0.0;
  if (kind == Norm::max) {
    for (double v : x) acc = std::max(acc, std::abs(v));
    return acc;
  }
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

inline double distance(std::span<const double> a, std::span<const double> b,
                       Norm kind = Norm::euclidean) {
  if (a.size() != b.size()) throw DimensionError("distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc = kind == Norm::max ? std::max(acc, std::abs(d)) : acc + d * d;
  }
  return kind == Norm::max ? acc : std::sqrt(acc);
}

inline bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// splitmix64 finalizer; used only to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_point(std::span<const double> x) {
  std::uint64_t h = 0x51ed270b27a1f6c3ULL;
  for (double v : x) {
    std::uint64_t bits = 0;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(v));
    h = mix64(h ^ bits);
  }
  return h;
}

/// Deterministic random stream. Streams are keyed by a list of integers so
/// that every sample is a pure function of its (seed, key...) tuple.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  template <typename... Keys>
  static Rng keyed(std::uint64_t seed, Keys... keys) {
    std::uint64_t h = mix64(seed);
    ((h = mix64(h ^ static_cast<std::uint64_t>(keys))), ...);
    return Rng(h);
  }

  double uniform(double lo = 0.0, double hi = 1.0) {
    // Manual mapping keeps streams identical across standard libraries.
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  double normal() {
    // Box-Muller on our own uniforms, same reason as above.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t next() { return engine_(); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 engine_;
};

/// Bounded analysis window: an axis-aligned box or a Euclidean ball.
class Region {
 public:
  enum class Kind { box, ball };

  static Region box(Point lower, Point upper) {
    if (lower.empty() || lower.size() != upper.size())
      throw DimensionError("Region::box: bounds must be non-empty and of equal dimension");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i])
        throw ConfigurationError("Region::box: need finite lower <= upper componentwise");
    }
    Region r;
    r.kind_ = Kind::box;
    r.lower_ = std::move(lower);
    r.upper_ = std::move(upper);
    r.center_.resize(r.lower_.size());
    for (std::size_t i = 0; i < r.lower_.size(); ++i) r.center_[i] = 0.5 * (r.lower_[i] + r.upper_[i]);
    return r;
  }

  static Region interval(double lo, double hi) { return box({lo}, {hi}); }

  static Region cube(std::size_t dim, double lo, double hi) {
    return box(Point(dim, lo), Point(dim, hi));
  }

  static Region ball(Point center, double radius) {
    if (center.empty()) throw DimensionError("Region::ball: empty center");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw ConfigurationError("Region::ball: radius must be positive and finite");
    Region r;
    r.kind_ = Kind::ball;
    r.center_ = std::move(center);
    r.radius_ = radius;
    r.lower_ = r.center_;
    r.upper_ = r.center_;
    for (std::size_t i = 0; i < r.center_.size(); ++i) {
      r.lower_[i] -= radius;
      r.upper_[i] += radius;
    }
    return r;
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] std::size_t dim() const { return center_.size(); }
  /// Bounding box.
  [[nodiscard]] const Point& lower() const { return lower_; }
  [[nodiscard]] const Point& upper() const { return upper_; }
  [[nodiscard]] const Point& center() const { return center_; }
  [[nodiscard]] double radius() const { return radius_; }

  [[nodiscard]] double max_extent() const {
    double e = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) e = std::max(e, upper_[i] - lower_[i]);
    return e;
  }

  [[nodiscard]] bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    if (kind_ == Kind::ball) return distance(x, center_) <= radius_;
    for (std::size_t i = 0; i < dim(); ++i)
      if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
    return true;
  }

  /// Nearest point of the region (componentwise clamp or radial projection).
  [[nodiscard]] Point project(Point x) const {
    if (kind_ == Kind::box) {
      for (std::size_t i = 0; i < dim(); ++i) x[i] = std::clamp(x[i], lower_[i], upper_[i]);
      return x;
    }
    const double d = distance(x, center_);
    if (d <= radius_) return x;
    for (std::size_t i = 0; i < dim(); ++i) x[i] = center_[i] + (x[i] - center_[i]) * (radius_ / d);
    return x;
  }

  /// Distance from x to the region boundary (negative outside).
  [[nodiscard]] double boundary_gap(std::span<const double> x) const {
    if (kind_ == Kind::ball) return radius_ - distance(x, center_);
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dim(); ++i) {
      if (upper_[i] == lower_[i]) continue;
      g = std::min({g, x[i] - lower_[i], upper_[i] - x[i]});
    }
    return g;
  }

  /// Same shape, scaled about its center.
  [[nodiscard]] Region scaled(double factor) const {
    if (kind_ == Kind::ball) return ball(center_, radius_ * factor);
    Point lo = lower_, hi = upper_;
    for (std::size_t i = 0; i < dim(); ++i) {
      const double half = 0.5 * (upper_[i] - lower_[i]) * factor;
      lo[i] = center_[i] - half;
      hi[i] = center_[i] + half;
    }
    return box(std::move(lo), std::move(hi));
  }

  [[nodiscard]] std::string describe() const;

 private:
  Region() = default;

  Kind kind_ = Kind::box;
  Point lower_, upper_, center_;
  double radius_ = 0.0;
};

inline std::string Region::describe() const {
  auto fmt = [](const Point& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(p[i]);
    }
    return s + ")";
  };
  if (kind_ == Kind::ball) return "ball center " + fmt(center_) + " radius " + std::to_string(radius_);
  return "box " + fmt(lower_) + " .. " + fmt(upper_);
}

/// Uniform random point of the region.
inline Point uniform_point(const Region& region, Rng& rng) {
  Point x(region.dim());
  if (region.kind() == Region::Kind::box) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(region.lower()[i], region.upper()[i]);
    return x;
  }
  // Uniform in the ball: gaussian direction, radius ~ U^(1/n).
  double n2 = 0.0;
  for (double& v : x) {
    v = rng.normal();
    n2 += v * v;
  }
  const double scale = region.radius() * std::pow(rng.uniform(), 1.0 / static_cast<double>(x.size())) /
                       std::sqrt(std::max(n2, 1e-300));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = region.center()[i] + x[i] * scale;
  return x;
}

/// Tensor grid with `per_axis` points per axis (endpoints included) over the
/// bounding box, restricted to the region.
inline std::vector<Point> grid_points(const Region& region, std::size_t per_axis) {
  per_axis = std::max<std::size_t>(per_axis, 2);
  const std::size_t n = region.dim();
  std::vector<Point> out;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
      x[i] = idx[i] + 1 == per_axis ? region.upper()[i]
                                    : region.lower()[i] + t * (region.upper()[i] - region.lower()[i]);
    }
    if (region.contains(x)) out.push_back(std::move(x));
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < per_axis) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (n == 0) return out;
  }
}

/// Latin hypercube sample of the bounding box, restricted to the region.
inline std::vector<Point> latin_hypercube(const Region& region, std::size_t count, std::uint64_t seed) {
  const std::size_t n = region.dim();
  Rng rng = Rng::keyed(seed, 0x1a7e5ULL);
  std::vector<std::vector<std::size_t>> perms(n, std::vector<std::size_t>(count));
  for (auto& p : perms) {
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = count; i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
  }
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (static_cast<double>(perms[i][k]) + rng.uniform()) / static_cast<double>(count);
      x[i] = region.lower()[i] + t * (region.upper()[i] - region.lower()[i]);
    }
    if (region.contains(x)) out.push_back(std::move(x));
  }
  return out;
}

/// Deterministic sample cloud of a region. Boxes of dimension <= 3 use a tensor
/// grid; everything else uses uniform random points. Higher `level` values give
/// nested refinements with at least four times the density of the previous one.
inline std::vector<Point> sample_cloud(const Region& region, std::size_t count, std::uint64_t seed,
                                       int level = 0) {
  const std::size_t n = region.dim();
  if (n <= 3) {
    const auto base = static_cast<std::size_t>(
        std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(count, 2)), 1.0 / static_cast<double>(n)) -
                  1e-9));
    std::size_t per_axis = std::max<std::size_t>(base, 2);
    const std::size_t factor = n == 1 ? 4 : 2;
    for (int l = 0; l < level; ++l) per_axis = (per_axis - 1) * factor + 1;
    return grid_points(region, per_axis);
  }
  std::size_t total = count;
  for (int l = 0; l < level; ++l) total *= 4;
  Rng rng = Rng::keyed(seed, 0xc10dULL);
  std::vector<Point> out;
  out.reserve(total);
  for (std::size_t k = 0; k < total; ++k) out.push_back(uniform_point(region, rng));
  return out;
}

/// Lexicographic comparison used wherever a deterministic tie-break is needed.
inline bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace exactpen
