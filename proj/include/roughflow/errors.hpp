#pragma once

#include <stdexcept>
#include <string>

namespace roughflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched lengths, grids or vector dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge (quadrature, root finding).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the finite range. Carries the step and seed that failed.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t step, std::size_t seed = 0)
      : NumericError(what), step_(step), seed_(seed) {}

  std::size_t step() const { return step_; }
  std::size_t seed() const { return seed_; }

 private:
  std::size_t step_;
  std::size_t seed_;
};

/// Evaluation of a singular kernel at its pole.
class SingularityError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace roughflow
