#pragma once

#include <stdexcept>
#include <string>

namespace hab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data: wind grids, CSV, checkpoints, scripts (CLI exit code 3).
class FormatError : public Error {
 public:
  using Error::Error;
};

class AxisError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ShapeError : public FormatError {
 public:
  using FormatError::FormatError;
};

class AltitudeOutOfRange : public Error {
 public:
  explicit AltitudeOutOfRange(double altitude)
      : Error("altitude " + std::to_string(altitude) + " m outside [0, 47000] m"),
        altitude_(altitude) {}
  double altitude() const { return altitude_; }

 private:
  double altitude_;
};

class IntegrationDiverged : public Error {
 public:
  using Error::Error;
};

/// Steady-state force balance could not be inverted for the requested rate.
class SolverError : public Error {
 public:
  using Error::Error;
};

class NoPositiveRoot : public SolverError {
 public:
  using SolverError::SolverError;
};

class TargetExceedsCurrent : public SolverError {
 public:
  TargetExceedsCurrent(const std::string& what, double target)
      : SolverError(what), target_(target) {}
  double target() const { return target_; }

 private:
  double target_;
};

/// Desired ascent unreachable even with all sand dropped; `clamped()` is 0.
class NegativeTarget : public SolverError {
 public:
  NegativeTarget(const std::string& what, double raw)
      : SolverError(what), raw_(raw) {}
  double raw() const { return raw_; }
  double clamped() const { return 0.0; }

 private:
  double raw_;
};

class InsufficientSand : public SolverError {
 public:
  using SolverError::SolverError;
};

class InsufficientHelium : public SolverError {
 public:
  using SolverError::SolverError;
};

class StepAfterDone : public Error {
 public:
  StepAfterDone() : Error("step() called on a finished episode; call reset()") {}
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

}  // namespace hab
