#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "exactpen/errors.hpp"

namespace exactpen {

/// A rate function w: R+ -> R+ with w(0) = 0, used both as the objective
/// modulus (how fast f may drop near the feasible set) and as the penalty
/// error-bound modulus.
class RateModulus {
 public:
  enum class Kind { linear, power, table, custom };

  static RateModulus linear(double slope) {
    if (!(slope >= 0.0) || !std::isfinite(slope)) throw ConfigurationError("RateModulus::linear: slope must be >= 0");
    RateModulus m(Kind::linear);
    m.a_ = slope;
    return m;
  }

  static RateModulus identity() { return linear(1.0); }

  /// w(t) = C t^alpha.
  static RateModulus power(double coeff, double exponent) {
    if (!(coeff > 0.0) || !(exponent > 0.0))
      throw ConfigurationError("RateModulus::power: need C > 0 and alpha > 0");
    RateModulus m(Kind::power);
    m.a_ = coeff;
    m.b_ = exponent;
    return m;
  }

  /// Piecewise-linear interpolation through (0,0) and the given knots;
  /// the last segment is extended linearly.
  static RateModulus table(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) throw ConfigurationError("RateModulus::table: no knots");
    double prev = 0.0;
    for (auto [t, w] : knots) {
      if (!(t > prev) || !(w >= 0.0)) throw ConfigurationError("RateModulus::table: knots must have increasing t > 0 and w >= 0");
      prev = t;
    }
    RateModulus m(Kind::table);
    m.knots_.reserve(knots.size() + 1);
    m.knots_.emplace_back(0.0, 0.0);
    m.knots_.insert(m.knots_.end(), knots.begin(), knots.end());
    return m;
  }

  static RateModulus custom(std::function<double(double)> fn, std::string name = "custom") {
    if (!fn) throw ConfigurationError("RateModulus::custom: empty function");
    if (fn(0.0) != 0.0) throw ConfigurationError("RateModulus::custom: w(0) must be 0");
    RateModulus m(Kind::custom);
    m.fn_ = std::move(fn);
    m.name_ = std::move(name);
    return m;
  }

  [[nodiscard]] Kind kind() const { return kind_; }

  double operator()(double t) const {
    if (!(t >= 0.0)) throw PreconditionError("RateModulus: argument must be >= 0");
    switch (kind_) {
      case Kind::linear:
        return a_ * t;
      case Kind::power:
        return t == 0.0 ? 0.0 : a_ * std::pow(t, b_);
      case Kind::table: {
        std::size_t i = 1;
        while (i + 1 < knots_.size() && knots_[i].first < t) ++i;
        const auto [t0, w0] = knots_[i - 1];
        const auto [t1, w1] = knots_[i];
        return w0 + (w1 - w0) * (t - t0) / (t1 - t0);
      }
      case Kind::custom:
        return fn_(t);
    }
    return 0.0;
  }

  /// True when w is strictly increasing along the (any-order) grid.
  [[nodiscard]] bool strictly_increasing_on(std::span<const double> grid) const {
    std::vector<double> ts(grid.begin(), grid.end());
    ts.push_back(0.0);
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ts[i] == ts[i - 1]) continue;
      if (!((*this)(ts[i]) > (*this)(ts[i - 1]))) return false;
    }
    return true;
  }

  [[nodiscard]] std::string describe() const {
    switch (kind_) {
      case Kind::linear:
        return "linear(" + std::to_string(a_) + ")";
      case Kind::power:
        return "power(" + std::to_string(a_) + ", " + std::to_string(b_) + ")";
      case Kind::table:
        return "table(" + std::to_string(knots_.size() - 1) + " knots)";
      case Kind::custom:
        return name_;
    }
    return {};
  }

 private:
  explicit RateModulus(Kind k) : kind_(k) {}

  Kind kind_;
  double a_ = 0.0, b_ = 1.0;
  std::vector<std::pair<double, double>> knots_;
  std::function<double(double)> fn_;
  std::string name_;
};

}  // namespace exactpen
