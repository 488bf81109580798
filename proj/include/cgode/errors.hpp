#pragma once

#include <stdexcept>
#include <string>

namespace cgode {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or precondition violation (bad digits, bad flags, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed decimal literal. Carries the byte offset of the first bad character.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Arithmetic between scalars of different precision contexts.
class MixedPrecisionError : public Error {
 public:
  using Error::Error;
};

// Pivot below the working-precision singularity threshold.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, const std::string& pivot_magnitude)
      : Error(what), pivot_magnitude_(pivot_magnitude) {}
  const std::string& pivot_magnitude() const { return pivot_magnitude_; }

 private:
  std::string pivot_magnitude_;
};

// Iteration failed to converge (power iteration, quadrature node search, Newton).
// Carries a printable trace of the final iterates / residual history.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::string trace = {})
      : Error(what), trace_(std::move(trace)) {}
  const std::string& trace() const { return trace_; }

 private:
  std::string trace_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Requested derivative / factor order not representable by the stored data.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Calibration could not separate the discretization and round-off regimes.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// File I/O failures. Distinct codes so callers can react per failure mode.
class IoError : public Error {
 public:
  enum class Code {
    kOpenFailed,
    kVersionMismatch,
    kTruncated,
    kDigitMismatch,
    kMalformed,
  };
  IoError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

}  // namespace cgode
