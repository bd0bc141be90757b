#pragma once

#include <stdexcept>
#include <string>

namespace srd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input (config files, dimensions, options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Failure of a numerical routine or of a modelling assumption the
// estimators rely on (Slater point, convexity in z, bounded parameters).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SlaterViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvexityViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateBoundary : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ModelMisspecification : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace srd
