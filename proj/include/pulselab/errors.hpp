#pragma once

#include <stdexcept>
#include <string>

namespace pulselab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

/// Bad input data: malformed catalog, inconsistent config, unknown names.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ConfigError"; }
};

/// Numerical preconditions or convergence failures.
class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "NumericalError"; }
};

#define PULSELAB_DECLARE_ERROR(Name, Base)                             \
  class Name : public Base {                                           \
   public:                                                             \
    using Base::Base;                                                  \
    const char* kind() const noexcept override { return #Name; }       \
  }

PULSELAB_DECLARE_ERROR(OutOfRange, ConfigError);
PULSELAB_DECLARE_ERROR(GridMismatch, ConfigError);
PULSELAB_DECLARE_ERROR(MissingTrajectory, ConfigError);
PULSELAB_DECLARE_ERROR(InsufficientPoints, NumericalError);
PULSELAB_DECLARE_ERROR(EigenvalueTooNegative, NumericalError);
PULSELAB_DECLARE_ERROR(NotUnitary, NumericalError);
PULSELAB_DECLARE_ERROR(QuadratureNotConverged, NumericalError);
PULSELAB_DECLARE_ERROR(NotFirstOrder, NumericalError);
PULSELAB_DECLARE_ERROR(NoFeasiblePoint, NumericalError);

#undef PULSELAB_DECLARE_ERROR

}  // namespace pulselab
