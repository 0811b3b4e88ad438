#pragma once

#include <stdexcept>
#include <string>

namespace rbmm {

// Caller broke a precondition: shapes, base points, parameter ranges.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation or surrogate family not defined for this manifold kind.
class UnsupportedKind : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

// Failures that come from the numbers rather than from the caller.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LineSearchFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rbmm
