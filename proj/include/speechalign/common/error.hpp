#pragma once

#include <stdexcept>
#include <string>

namespace speechalign {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, out-of-range values, broken invariants.
// The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Remote endpoint unreachable or returned a non-2xx status.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace speechalign
