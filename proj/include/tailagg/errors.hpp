#pragma once

#include <stdexcept>
#include <string>

namespace tailagg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside the documented range of an operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested tail prediction does not match any theorem or table case.
class PredictionError : public Error {
 public:
  using Error::Error;
};

/// Not enough data, or no estimate exists for the given data.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// An empirical quantile reached or passed the predicted upper endpoint.
class EndpointViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tailagg
