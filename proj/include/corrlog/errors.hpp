#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corrlog {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, wrong shapes, invalid parameters, violated
/// type invariants of user-supplied data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed or detected a degenerate configuration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public DataError {
 public:
  using DataError::DataError;
};

class MalformedHeader : public DataError {
 public:
  using DataError::DataError;
};

class ShapeMismatch : public DataError {
 public:
  using DataError::DataError;
};

class NonFiniteValue : public DataError {
 public:
  using DataError::DataError;
};

class ZeroVariance : public DataError {
 public:
  ZeroVariance(std::size_t region, std::size_t window)
      : DataError("zero variance in region " + std::to_string(region) + " within window " +
                  std::to_string(window)),
        region_(region),
        window_(window) {}

  std::size_t region() const noexcept { return region_; }
  std::size_t window() const noexcept { return window_; }

 private:
  std::size_t region_;
  std::size_t window_;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateCovariance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LineSearchStalled : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An iterative solver hit its iteration cap. Carries the last residual.
class MaxIterationsExceeded : public NumericalError {
 public:
  MaxIterationsExceeded(const std::string& what, int iterations, double last_residual)
      : NumericalError(what + " after " + std::to_string(iterations) +
                       " iterations (last residual " + std::to_string(last_residual) + ")"),
        iterations_(iterations),
        last_residual_(last_residual) {}

  int iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  int iterations_;
  double last_residual_;
};

}  // namespace corrlog
