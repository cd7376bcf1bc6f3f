#pragma once

#include <stdexcept>
#include <string>

namespace hus {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failures (exit code 3 at the command line).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the declared domain of its field.
class DomainExit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The adaptive step size collapsed; usually stiffness or finite-time blow-up.
class StepUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A sampled integrand exceeded the bound its truncation horizon was built on.
class BoundViolated : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Panel refinement hit its level cap before meeting the tolerance.
class QuadratureStall : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Re(lambda) == 0.
class InvalidLambda : public Error {
 public:
  using Error::Error;
};

/// Malformed parameters for a field, tolerance set or perturbation.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hus
