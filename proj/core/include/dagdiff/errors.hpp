#pragma once

#include <stdexcept>
#include <string>

namespace dagdiff {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rotation angle within 1e-6 of pi: the log map has no preferred branch
/// there. Callers must perturb or resample the pose.
struct AngleNearPiError : Error {
  using Error::Error;
};

/// Non-positive or otherwise unusable shape dimensions.
struct InvalidDimensionError : Error {
  using Error::Error;
};

/// Malformed input file. `line` is 1-based where known, 0 otherwise.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line_no = 0)
      : Error(line_no ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  std::size_t line;
};

/// Contact normal is not unit length.
struct DegenerateNormalError : Error {
  using Error::Error;
};

/// Simplex exceeded its iteration budget; caller treats as infeasible.
struct NumericalFailureError : Error {
  using Error::Error;
};

/// Rejection sampling acceptance rate fell below the floor.
struct SamplingExhaustedError : Error {
  using Error::Error;
};

struct EmptyCloudError : Error {
  using Error::Error;
};

struct NonFiniteGradientError : Error {
  using Error::Error;
};

struct InvalidScheduleError : Error {
  using Error::Error;
};

/// Training loss became non-finite; last finite state is preserved.
struct DivergedError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace dagdiff
