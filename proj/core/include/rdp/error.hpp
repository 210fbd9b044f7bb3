#pragma once

#include <stdexcept>
#include <string>

namespace rdp {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid geometry: bad dimension, ball outside the box, point outside a domain.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Coefficients violating the declared bounds or ellipticity.
class CoefficientError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to reach the requested tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Measure data outside the admissible class (negative density, obstacle where a
// Kato measure is required, incompatible boundary data).
class MeasureError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdp
