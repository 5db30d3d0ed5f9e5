#pragma once

#include <stdexcept>
#include <string>

namespace geoctl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Expression text could not be parsed; `column` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t column)
      : Error(msg + " (column " + std::to_string(column) + ")"), message_(msg), column_(column) {}
  std::size_t column() const { return column_; }
  /// The message without the position.
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::size_t column_;
};

/// A trajectory produced a non-finite state.
class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(const std::string& msg, double last_valid_time)
      : Error(msg), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// A trajectory of a restricted system left its domain.
class DomainExit : public Error {
 public:
  DomainExit(const std::string& msg, double exit_time) : Error(msg), exit_time_(exit_time) {}
  double exit_time() const { return exit_time_; }

 private:
  double exit_time_;
};

/// A point where a construction needs genericity (characteristic control,
/// frame rank, prolongation) fails to be generic.
class DegeneratePoint : public Error {
 public:
  DegeneratePoint(const std::string& msg, double time = 0.0) : Error(msg), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// An initial condition violates a constraint of a constrained Hamiltonian system.
class PreconditionViolation : public Error {
 public:
  PreconditionViolation(const std::string& constraint, const std::string& msg)
      : Error(msg), constraint_(constraint) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

class ShootingFailed : public Error {
 public:
  ShootingFailed(const std::string& msg, double best_residual)
      : Error(msg), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// A leaf of the characteristic foliation misses the transversal slice.
class ChartTooLarge : public Error {
 public:
  using Error::Error;
};

class NotLipschitz : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

/// A frame that is not a (2,3,5) distribution at the requested point.
class NotCartan : public Error {
 public:
  using Error::Error;
};

}  // namespace geoctl
