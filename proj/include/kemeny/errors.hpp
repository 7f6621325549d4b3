#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kemeny {

/// Base class for all errors raised by this library.
class KemenyError : public std::runtime_error {
 public:
  explicit KemenyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// One violated invariant found while validating a raw matrix.
struct Violation {
  enum class Code {
    NotSquare,
    RowSum,         // row sum off by more than the tolerance
    NegativeEntry,  // entry below -tol (Discrete) / off-diagonal < -tol (Continuous)
    EntryAboveOne,  // Discrete entry > 1 + tol
    PositiveDiagonal,  // Continuous diagonal > tol
    NotIrreducible,
    NonFinite,
  };
  Code code;
  long row = -1;
  long col = -1;
  double deviation = 0.0;
  std::vector<long> component;  // offending states for NotIrreducible
  std::string message;
};

/// Validation failed; carries every violated invariant, not just the first.
class ChainValidationError : public KemenyError {
 public:
  ChainValidationError(std::string msg, std::vector<Violation> violations)
      : KemenyError(std::move(msg)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// A linear solve failed or produced non-finite / out-of-range results.
class SingularSystemError : public KemenyError {
 public:
  using KemenyError::KemenyError;
};

/// Per-start Kemeny sums disagree beyond tolerance: numerical breakdown.
class ConstancyViolationError : public KemenyError {
 public:
  ConstancyViolationError(std::string msg, double spread, double tol)
      : KemenyError(std::move(msg)), spread_(spread), tol_(tol) {}
  double spread() const { return spread_; }
  double tolerance() const { return tol_; }

 private:
  double spread_;
  double tol_;
};

/// Jump-chain construction hit a state with zero exit rate.
class AbsorbingStateError : public KemenyError {
 public:
  AbsorbingStateError(std::string msg, long state)
      : KemenyError(std::move(msg)), state_(state) {}
  long state() const { return state_; }

 private:
  long state_;
};

/// Renewal-limit estimators require an aperiodic discrete chain.
class PeriodicChainError : public KemenyError {
 public:
  using KemenyError::KemenyError;
};

/// The birth-death normalizing series B diverges.
class NotPositiveRecurrentError : public KemenyError {
 public:
  using KemenyError::KemenyError;
};

/// An operation was called before its series precondition was established.
class PreconditionUnmetError : public KemenyError {
 public:
  using KemenyError::KemenyError;
};

/// A designed rate family received nonpositive f or lambda values.
class InvalidDesignError : public KemenyError {
 public:
  using KemenyError::KemenyError;
};

/// Malformed argument (bad index, bad rule parameters, ...).
class InvalidArgumentError : public KemenyError {
 public:
  using KemenyError::KemenyError;
};

}  // namespace kemeny
