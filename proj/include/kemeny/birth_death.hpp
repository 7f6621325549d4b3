#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kemeny/chain.hpp"
#include "kemeny/series.hpp"

namespace kemeny {

/// Symbolic positive-sequence rule for birth/death/f sequences; kept
/// symbolic so emitted configs round-trip exactly.
class RateRule {
 public:
  enum class Kind { Power, Constant, InverseSquare, Table };
  enum class Extend { Last, Error };

  static RateRule power(double base);      // n -> base^n
  static RateRule constant(double value);  // n -> value
  static RateRule inverse_square();        // n -> 1/n^2 (n >= 1), 0 at n = 0
  static RateRule table(std::vector<double> values, Extend extend);

  double at(long n) const;
  Kind kind() const { return kind_; }
  double base() const { return param_; }
  double value() const { return param_; }
  const std::vector<double>& values() const { return values_; }
  Extend extend() const { return extend_; }

 private:
  RateRule(Kind k, double param, std::vector<double> values, Extend ext)
      : kind_(k), param_(param), values_(std::move(values)), extend_(ext) {}
  Kind kind_;
  double param_;
  std::vector<double> values_;
  Extend extend_;
};

enum class BdFamily { MM1, SpedUpMM1, DesignedF, PowerLaw, MMInfinity, Table };

const char* to_string(BdFamily f);

/// An infinite birth-and-death process on {0, 1, ...} given by birth rates
/// lambda_n (n >= 0) and death rates mu_n (n >= 1), both positive.
/// Discrete specs additionally require lambda_n + mu_n <= 1 per state.
/// Families carry closed-form knowledge used for analytic verdicts.
class BirthDeathSpec {
 public:
  static BirthDeathSpec mm1(double lambda, double mu,
                            TimeKind kind = TimeKind::Continuous);
  /// Rates sped up with depth: mu_n = lambda_{n-1} / rho, so that
  /// beta_n = rho^n regardless of the lambda sequence.
  static BirthDeathSpec sped_up_mm1(double rho, RateRule lambda_rule,
                                    TimeKind kind = TimeKind::Continuous);
  static BirthDeathSpec designed_f(RateRule f_rule, RateRule lambda_rule,
                                   TimeKind kind = TimeKind::Continuous);
  /// lambda_0 = 1, lambda_j = mu_j = j^(1+alpha) for j >= 1.
  static BirthDeathSpec power_law(double alpha,
                                  TimeKind kind = TimeKind::Continuous);
  static BirthDeathSpec mm_infinity(double lambda, double mu,
                                    TimeKind kind = TimeKind::Continuous);
  static BirthDeathSpec table(RateRule lambda_rule, RateRule mu_rule,
                              TimeKind kind = TimeKind::Continuous);

  TimeKind kind() const { return kind_; }
  BdFamily family() const { return family_; }

  double lambda(long n) const;  // n >= 0
  double mu(long n) const;      // n >= 1
  /// f_j of the theta recurrence when the family defines it directly.
  double f_of(long j) const;

  /// Family knowledge: is theta finite / is sum 1/mu_j finite / is B
  /// finite, when known in closed form.
  std::optional<bool> analytic_theta_finite() const;
  std::optional<bool> analytic_necessary_finite() const;
  std::optional<bool> analytic_B_finite() const;

  double param1() const { return p1_; }
  double param2() const { return p2_; }
  const std::optional<RateRule>& lambda_rule() const { return lambda_rule_; }
  const std::optional<RateRule>& mu_rule() const { return mu_rule_; }
  const std::optional<RateRule>& f_rule() const { return f_rule_; }

 private:
  BirthDeathSpec(TimeKind kind, BdFamily family) : kind_(kind), family_(family) {}
  void check_discrete_row(long n, double lam, double mu) const;

  TimeKind kind_;
  BdFamily family_;
  double p1_ = 0.0, p2_ = 0.0;
  std::optional<RateRule> lambda_rule_, mu_rule_, f_rule_;
};

struct BdStationary {
  std::vector<double> beta;      // beta_0 .. beta_N (0 on underflow)
  std::vector<double> log_beta;  // natural logs, always finite
  SeriesResult B;                // normalization series
  std::vector<double> pi;        // beta / B when B converged, else empty
};

/// beta by the multiplicative recurrence, B by the series scan; requires
/// B to converge for the normalized pi (NotPositiveRecurrentError when B
/// diverges).
BdStationary bd_stationary(const BirthDeathSpec& spec, long n_states,
                           ScanOptions opts = {});

/// Theta = sum_j f_j with f_j = (lambda_{j-1} f_{j-1} + 1) / mu_j, f_0 = 0.
/// Finite iff Kemeny's constant of the process is finite. Analytic family
/// hooks and the necessary condition (sum 1/mu_j) are consulted before
/// scanning; all outcomes are encoded in the verdict.
SeriesResult theta_series(const BirthDeathSpec& spec, ScanOptions opts = {});

/// Verdict on sum_{j>=1} 1/mu_j; divergence here forces theta to diverge.
SeriesResult necessary_condition(const BirthDeathSpec& spec,
                                 ScanOptions opts = {});

/// E_pi[theta_0] = sum_k (lambda_k pi_k)^-1 (sum_{j>k} pi_j)^2, evaluated
/// with tail remainders accumulated backward (never by re-subtracting
/// partial sums, which cancels catastrophically for fast-decaying
/// families). Requires theta to have converged.
SeriesResult e_pi_theta0(const BirthDeathSpec& spec, ScanOptions opts = {});

/// K' = Theta - E_pi[theta_0] when Theta converges; Diverged with Theta's
/// reason otherwise. Throws NotPositiveRecurrentError when B diverges.
SeriesResult kemeny_bd(const BirthDeathSpec& spec, ScanOptions opts = {});

/// E_0[theta_j] = sum_{k<j} (lambda_k pi_k)^-1 sum_{l<=k} pi_l
/// (B cancels; evaluated in beta space).
double hitting_from_zero(const BirthDeathSpec& spec, long j,
                         ScanOptions opts = {});

/// Expected total time in j before first reaching 0, started in j:
/// pi_j sum_{1<=k<=j} 1/(pi_k mu_k). Continuous specs only; summing over
/// all j recovers Theta.
double taboo_sojourn(const BirthDeathSpec& spec, long j,
                     ScanOptions opts = {});

/// Builds the designed family whose theta recurrence reproduces exactly
/// the given f_j: mu_j = (lambda_{j-1} f_{j-1} + 1) / f_j.
BirthDeathSpec design_from_f(RateRule f_rule, RateRule lambda_rule,
                             TimeKind kind = TimeKind::Continuous);

/// Finite chain on {0..N} with the boundary made reflecting at N
/// (Discrete folds lambda_N into the holding probability; Continuous sets
/// lambda_N = 0).
MarkovChain truncate(const BirthDeathSpec& spec, long n_top);

}  // namespace kemeny
