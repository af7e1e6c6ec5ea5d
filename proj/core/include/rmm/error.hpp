#pragma once

#include <stdexcept>
#include <string>

namespace rmm {

// Inputs that violate a documented precondition (bad config, inadmissible
// parameters, unrepresentable geometry).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during a solve: singular or indefinite systems,
// divergence, loss of symmetry beyond tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmm
