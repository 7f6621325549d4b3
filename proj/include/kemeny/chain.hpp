#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "kemeny/errors.hpp"

namespace kemeny {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class TimeKind { Discrete, Continuous };

inline const char* to_string(TimeKind k) {
  return k == TimeKind::Discrete ? "dtmc" : "ctmc";
}

struct ValidationOptions {
  /// Row-sum tolerance, relative to the row magnitude (file-sourced
  /// matrices carry decimal rounding).
  double tol = 1e-12;
};

/// A validated irreducible Markov chain: row-stochastic matrix (Discrete)
/// or generator with zero row sums (Continuous). Immutable after
/// construction; safe to share across threads.
class MarkovChain {
 public:
  /// Validates `raw` and returns the chain, or throws ChainValidationError
  /// listing every violated invariant. Periodicity (Discrete) is non-fatal
  /// and recorded on the chain.
  static MarkovChain validate(Matrix raw, TimeKind kind,
                              std::vector<std::string> labels = {},
                              ValidationOptions opts = {});

  TimeKind kind() const { return kind_; }
  long size() const { return rates_.rows(); }
  /// Transition matrix (Discrete) or generator (Continuous).
  const Matrix& rates() const { return rates_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// gcd of cycle lengths; 1 for every continuous chain.
  long period() const { return period_; }
  bool aperiodic() const { return period_ == 1; }

  double validation_tol() const { return tol_; }

 private:
  MarkovChain(Matrix rates, TimeKind kind, std::vector<std::string> labels,
              long period, double tol)
      : rates_(std::move(rates)),
        kind_(kind),
        labels_(std::move(labels)),
        period_(period),
        tol_(tol) {}

  Matrix rates_;
  TimeKind kind_;
  std::vector<std::string> labels_;
  long period_;
  double tol_;
};

struct StationaryDistribution {
  Vector pi;        // entrywise positive, sums to 1 within tolerance
  double residual;  // inf-norm of pi'P - pi' (or pi'Q)
};

/// Solves for the stationary vector by replacing one balance equation with
/// the normalization constraint; one pass of iterative refinement.
/// Deterministic: identical input bits give identical output bits.
StationaryDistribution stationary_distribution(const MarkovChain& chain,
                                               double tol = 1e-12);

/// Embedded discrete chain of a continuous one: P_ij = q_ij / q_i off the
/// diagonal, zero diagonal. Throws AbsorbingStateError if some q_i == 0.
MarkovChain jump_chain(const MarkovChain& chain);

}  // namespace kemeny
