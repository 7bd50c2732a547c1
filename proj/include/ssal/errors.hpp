#pragma once

#include <stdexcept>
#include <string>

namespace ssal {

// Base class for all library errors. CLI maps subclasses to exit codes:
// IoError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A documented precondition or type invariant was violated by the caller.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& msg) : Error(msg) {}
};

// Input is orthogonal (within tolerance) to the projection target; there is
// no meaningful nearest point. Attack layers treat this as attack failure.
class DegenerateProjection : public Error {
 public:
  explicit DegenerateProjection(const std::string& msg) : Error(msg) {}
};

// A matrix that must have full rank (or condition below the cap) does not.
class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& msg) : Error(msg) {}
};

// Curve fitting received degenerate data (no spread to fit against).
class FitError : public Error {
 public:
  explicit FitError(const std::string& msg) : Error(msg) {}
};

// A configuration is structurally valid but unusable (e.g. rejection
// sampling cannot terminate).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// File or stream could not be read/written/parsed.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace ssal
