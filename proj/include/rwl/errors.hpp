#pragma once

#include <stdexcept>
#include <string>

namespace rwl {

// Bad user input or violated preconditions (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature or factorization did not reach the requested accuracy (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FactorizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A rate cannot be extracted from the data at hand (exit code 4).
class StatisticalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rwl
