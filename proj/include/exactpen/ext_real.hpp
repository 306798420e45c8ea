#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "exactpen/errors.hpp"

namespace exactpen {

/// A value of R ∪ {+∞}. Minus infinity and NaN are rejected on construction.
class ExtReal {
 public:
  constexpr ExtReal() = default;

  // Implicit on purpose: objectives return plain doubles, +inf meaning +∞.
  ExtReal(double v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v)) throw PreconditionError("ExtReal: NaN is not a value of R ∪ {+inf}");
    if (v == -std::numeric_limits<double>::infinity())
      throw PreconditionError("ExtReal: -inf is not a value of R ∪ {+inf}");
  }

  static ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity()); }

  [[nodiscard]] bool is_finite() const { return std::isfinite(value_); }
  [[nodiscard]] bool is_infinite() const { return !is_finite(); }

  /// Raw value; +inf when infinite.
  [[nodiscard]] double value() const { return value_; }

  friend ExtReal operator+(ExtReal a, ExtReal b) { return ExtReal(a.value_ + b.value_); }
  ExtReal& operator+=(ExtReal other) { return *this = *this + other; }

  friend bool operator==(ExtReal a, ExtReal b) { return a.value_ == b.value_; }
  friend auto operator<=>(ExtReal a, ExtReal b) { return a.value_ <=> b.value_; }

  friend std::ostream& operator<<(std::ostream& os, ExtReal v) {
    if (v.is_infinite()) return os << "+inf";
    return os << v.value_;
  }

 private:
  double value_ = 0.0;
};

}  // namespace exactpen
