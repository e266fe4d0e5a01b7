#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbfsurf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed spec strings, out-of-range parameters, bad files.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Failure of a numerical procedure (factorization, iteration, time stepping).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : NumericalError("matrix is not positive definite (pivot " +
                       std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class SingularMatrix : public NumericalError {
 public:
  explicit SingularMatrix(std::size_t pivot)
      : NumericalError("matrix is singular to working precision (pivot " +
                       std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BlowUp : public NumericalError {
 public:
  BlowUp(std::size_t step, const std::string& what)
      : NumericalError("solution blew up at step " + std::to_string(step) +
                       ": " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ParseError : public InvalidArgument {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InvalidArgument("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rbfsurf
