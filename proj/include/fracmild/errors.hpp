#ifndef FRACMILD_ERRORS_HPP
#define FRACMILD_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracmild {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument or state outside an operation's domain.
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

/// Malformed or inconsistent configuration (schema violations, plan/order
/// mismatches, unknown catalog names).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Taylor series did not converge within the node budget or required more
/// precision than the internal arithmetic carries.
class SeriesBudgetError : public Error {
public:
  explicit SeriesBudgetError(const std::string& what) : Error(what) {}
};

/// Quadrature truncation domain too small; carries the measured tail.
class TruncationError : public Error {
public:
  TruncationError(const std::string& what, double measured_tail_)
      : Error(what), measured_tail(measured_tail_) {}
  double measured_tail;
};

/// beta = 1: the subordinator density is a Dirac mass, no density exists.
class DegenerateSubordinatorError : public DomainError {
public:
  explicit DegenerateSubordinatorError(const std::string& what) : DomainError(what) {}
};

/// Mellin integral diverges (omega >= 1 + 1/beta).
class MellinDivergenceError : public DomainError {
public:
  explicit MellinDivergenceError(const std::string& what) : DomainError(what) {}
};

/// Log-log fit rejected (non-monotone data or residual above threshold).
class FitError : public Error {
public:
  FitError(const std::string& what, double residual_) : Error(what), residual(residual_) {}
  double residual;
};

/// Picard iteration did not converge. `residual_decreasing` distinguishes a
/// genuine loss of contraction from an exhausted iteration budget; both count
/// as failure for horizon detection.
class NoContractionError : public Error {
public:
  NoContractionError(const std::string& what, std::vector<double> history,
                     bool decreasing)
      : Error(what), residual_history(std::move(history)),
        residual_decreasing(decreasing) {}
  std::vector<double> residual_history;
  bool residual_decreasing;
};

} // namespace fracmild

#endif
