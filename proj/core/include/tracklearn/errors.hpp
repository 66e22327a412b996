#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tracklearn {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates an operation precondition
/// (probability outside [0,1], empty input, non-positive dt, ...).
struct InvalidArgumentError : Error {
  using Error::Error;
};

/// Vector or matrix dimensions do not match.
struct ShapeError : Error {
  using Error::Error;
};

/// A numerical operation failed (singular innovation covariance,
/// non-finite gradient). State is left unchanged by the failing call.
struct NumericalError : Error {
  using Error::Error;
};

/// Not enough data to compute the requested quantity.
struct InsufficientDataError : Error {
  using Error::Error;
};

/// Operation called in the wrong phase of a run (e.g. seeding after frame 0).
struct InvalidPhaseError : Error {
  using Error::Error;
};

/// Unsupported file format version.
struct VersionError : Error {
  using Error::Error;
};

/// A stream was advanced past its horizon.
struct EndOfStreamError : Error {
  using Error::Error;
};

/// Configuration validation failure; carries one message per violated field.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) {
      out += "\n  - " + s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace tracklearn
