#pragma once

#include <stdexcept>
#include <string>

namespace eldiff {

enum class ErrorCode {
  NonZeroMean,
  LambdaZero,
  NotConverged,
  NonPositiveZ,
  BlowUp,
  NegativeDensity,
  MisalignedSnapshots,
  InsufficientData,
  ModeOutOfBand,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Raised by numerical routines. The code identifies the failed contract so
/// callers (the CLI in particular) can map it to an exit status.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File I/O failure; the message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eldiff
