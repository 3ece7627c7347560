#pragma once

#include <stdexcept>
#include <string>

namespace bvpdisc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad order, empty input, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The IVP integrator produced a non-finite state.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// A shooting iteration failed to hit the far boundary condition.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A learned model cannot be turned into an operator (no forcing term, or a
// vanishing forcing coefficient).
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace bvpdisc
