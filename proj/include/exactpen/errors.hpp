#pragma once

#include <stdexcept>
#include <string>

namespace exactpen {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or region had the wrong number of coordinates.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented domain (infeasible base
/// point, infinite objective value, non-positive modulus, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A problem or option set is inconsistent (missing distance oracle, bad
/// schedule parameters, malformed problem definition).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// No admissible point could be found inside the analysis region.
class EmptyRegionError : public Error {
 public:
  using Error::Error;
};

/// The exact-penalty ladder finished without ever finding a feasible point.
class InfeasibleRegionError : public Error {
 public:
  using Error::Error;
};

}  // namespace exactpen
