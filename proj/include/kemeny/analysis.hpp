#pragma once

#include <map>
#include <optional>
#include <string>

#include "kemeny/chain.hpp"

namespace kemeny {

/// Expected first hitting times of one target state from every start.
/// h[target] == 0; components too large for double are reported as +inf
/// (the exact-analysis pipeline keeps them in extended precision
/// internally where needed).
struct HittingProfile {
  long target;
  Vector h;
};

struct DeviationMatrix {
  Matrix d;
  double fixed_point_residual;  // (I-P)D - (I - 1 pi') resp. -QD - (...)
  double row_sum_residual;      // inf-norm of D 1
  double left_null_residual;    // inf-norm of pi' D
};

struct AnalysisReport {
  Vector kprime_by_state;        // per-start sums of pi_j * E_i[theta_j]
  double kprime;                 // their common value (pi-weighted mean)
  std::optional<double> k;       // Discrete: K = K' + 1
  double spread;                 // max - min of kprime_by_state
  double deviation_trace;        // independent route; must agree with kprime
  std::optional<Matrix> mfpt;    // Discrete: E_i[T_j], diagonal 1/pi_j
  std::optional<bool> hunter_bound_ok;  // Discrete: K >= (m+1)/2
  std::map<std::string, double> residuals;
};

struct IdentityReport {
  std::optional<double> fixed_point_residual;  // ||P w - w||_inf, Discrete
  double appendix_max_residual;  // max_ij |pi_j E_i[theta_j] - (D_jj - D_ij)|
  double left_null_residual;     // ||pi' D||_inf
  double row_sum_residual;       // ||D 1||_inf
};

/// First hitting times E_i[theta_j]. Tridiagonal chains use a stable
/// ladder recurrence; general chains use a dense LU solve with one pass of
/// iterative refinement.
HittingProfile hitting_times(const MarkovChain& chain, long target);

/// Mean first passage matrix for a discrete chain: off-diagonal hitting
/// times, diagonal expected return times 1/pi_j.
Matrix mfpt_matrix(const MarkovChain& chain);

/// Kemeny's constant by the hitting route (m per-target solves), plus the
/// deviation-trace route for cross-checking. `tol` is relative: the report
/// is rejected with ConstancyViolationError when
/// spread > tol * (1 + |kprime|).
AnalysisReport kemeny_exact(const MarkovChain& chain, double tol = 1e-9);

/// Deviation matrix by a single shifted solve (never by summing the
/// series; the series is a test oracle only).
DeviationMatrix deviation_matrix(const MarkovChain& chain);

/// trace of the deviation matrix; the fast single-solve route to K'.
double kemeny_via_trace(const MarkovChain& chain);

/// Named residuals for the fixed-point, appendix, and null-space
/// identities.
IdentityReport identity_report(const MarkovChain& chain);

}  // namespace kemeny
