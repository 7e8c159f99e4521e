#pragma once

#include <stdexcept>
#include <string>

namespace lqioc {

// Base of every error thrown by the library. The CLI maps InputError and
// ParseError to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatch, non-finite entries, bad ranges.
class InputError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be PSD / PD is not.
class DefinitenessError : public Error {
 public:
  using Error::Error;
};

// Iteration failed to converge or a factorization broke down.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The system violates a structural assumption (controllability, observability,
// full column rank of B).
class ModelError : public Error {
 public:
  using Error::Error;
};

// The requested construction does not apply to this instance (e.g. m == n).
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace lqioc
