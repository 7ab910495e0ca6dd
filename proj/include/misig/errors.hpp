#pragma once

#include <stdexcept>

namespace misig {

// Malformed files, inconsistent shapes, out-of-range configuration.  The CLI
// maps this family to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric failures at runtime.  The CLI maps this family to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Regularized covariance could not be factorized.
class SingularBackgroundError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Candidate signature coincides with the background mean, so the matched
// filter direction is undefined.
class DegenerateSignatureError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace misig
