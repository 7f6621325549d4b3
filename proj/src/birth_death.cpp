#include "kemeny/birth_death.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kemeny {

// ---------------------------------------------------------------------------
// RateRule

RateRule RateRule::power(double base) {
  if (!(base > 0.0))
    throw InvalidArgumentError("power rule requires a positive base");
  return RateRule(Kind::Power, base, {}, Extend::Error);
}

RateRule RateRule::constant(double value) {
  if (!(value > 0.0))
    throw InvalidArgumentError("constant rule requires a positive value");
  return RateRule(Kind::Constant, value, {}, Extend::Error);
}

RateRule RateRule::inverse_square() {
  return RateRule(Kind::InverseSquare, 0.0, {}, Extend::Error);
}

RateRule RateRule::table(std::vector<double> values, Extend extend) {
  if (values.empty())
    throw InvalidArgumentError("table rule requires at least one value");
  return RateRule(Kind::Table, 0.0, std::move(values), extend);
}

double RateRule::at(long n) const {
  switch (kind_) {
    case Kind::Power:
      return std::pow(param_, static_cast<double>(n));
    case Kind::Constant:
      return param_;
    case Kind::InverseSquare:
      return n >= 1 ? 1.0 / (static_cast<double>(n) * static_cast<double>(n))
                    : 0.0;
    case Kind::Table:
      if (n < static_cast<long>(values_.size())) return values_[n];
      if (extend_ == Extend::Last) return values_.back();
      throw InvalidArgumentError("table rule queried past its end at index " +
                                 std::to_string(n));
  }
  return 0.0;
}

const char* to_string(BdFamily f) {
  switch (f) {
    case BdFamily::MM1: return "mm1";
    case BdFamily::SpedUpMM1: return "sped_up_mm1";
    case BdFamily::DesignedF: return "designed_f";
    case BdFamily::PowerLaw: return "power_law";
    case BdFamily::MMInfinity: return "mm_infinity";
    default: return "table";
  }
}

// ---------------------------------------------------------------------------
// BirthDeathSpec

BirthDeathSpec BirthDeathSpec::mm1(double lambda, double mu, TimeKind kind) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw InvalidArgumentError("mm1 requires positive lambda and mu");
  BirthDeathSpec s(kind, BdFamily::MM1);
  s.p1_ = lambda;
  s.p2_ = mu;
  s.check_discrete_row(1, lambda, mu);
  return s;
}

BirthDeathSpec BirthDeathSpec::sped_up_mm1(double rho, RateRule lambda_rule,
                                           TimeKind kind) {
  if (!(rho > 0.0 && rho < 1.0))
    throw InvalidArgumentError("sped-up mm1 requires 0 < rho < 1");
  BirthDeathSpec s(kind, BdFamily::SpedUpMM1);
  s.p1_ = rho;
  s.lambda_rule_ = std::move(lambda_rule);
  return s;
}

BirthDeathSpec BirthDeathSpec::designed_f(RateRule f_rule,
                                          RateRule lambda_rule,
                                          TimeKind kind) {
  BirthDeathSpec s(kind, BdFamily::DesignedF);
  s.f_rule_ = std::move(f_rule);
  s.lambda_rule_ = std::move(lambda_rule);
  for (long j = 1; j <= 8; ++j) {
    if (!(s.f_rule_->at(j) > 0.0))
      throw InvalidDesignError("designed family requires f_j > 0 for j >= 1");
    if (!(s.lambda_rule_->at(j - 1) > 0.0))
      throw InvalidDesignError("designed family requires positive lambda");
  }
  return s;
}

BirthDeathSpec BirthDeathSpec::power_law(double alpha, TimeKind kind) {
  if (!(alpha > 0.0))
    throw InvalidArgumentError("power-law family requires alpha > 0");
  BirthDeathSpec s(kind, BdFamily::PowerLaw);
  s.p1_ = alpha;
  return s;
}

BirthDeathSpec BirthDeathSpec::mm_infinity(double lambda, double mu,
                                           TimeKind kind) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw InvalidArgumentError("mm_infinity requires positive lambda and mu");
  BirthDeathSpec s(kind, BdFamily::MMInfinity);
  s.p1_ = lambda;
  s.p2_ = mu;
  return s;
}

BirthDeathSpec BirthDeathSpec::table(RateRule lambda_rule, RateRule mu_rule,
                                     TimeKind kind) {
  BirthDeathSpec s(kind, BdFamily::Table);
  s.lambda_rule_ = std::move(lambda_rule);
  s.mu_rule_ = std::move(mu_rule);
  return s;
}

void BirthDeathSpec::check_discrete_row(long n, double lam, double mu) const {
  if (kind_ == TimeKind::Discrete && lam + mu > 1.0 + 1e-12)
    throw InvalidArgumentError(
        "discrete spec violates lambda_n + mu_n <= 1 at n = " +
        std::to_string(n));
}

double BirthDeathSpec::lambda(long n) const {
  if (n < 0) throw InvalidArgumentError("lambda index must be >= 0");
  double v;
  switch (family_) {
    case BdFamily::MM1:
    case BdFamily::MMInfinity:
      v = p1_;
      break;
    case BdFamily::PowerLaw:
      v = n == 0 ? 1.0
                 : std::pow(static_cast<double>(n), 1.0 + p1_);
      break;
    default:
      v = lambda_rule_->at(n);
  }
  if (!(v > 0.0))
    throw InvalidArgumentError("lambda_" + std::to_string(n) +
                               " is not positive");
  if (kind_ == TimeKind::Discrete && n >= 1) check_discrete_row(n, v, mu(n));
  return v;
}

double BirthDeathSpec::mu(long n) const {
  if (n < 1) throw InvalidArgumentError("mu index must be >= 1");
  double v;
  switch (family_) {
    case BdFamily::MM1:
      v = p2_;
      break;
    case BdFamily::MMInfinity:
      v = static_cast<double>(n) * p2_;
      break;
    case BdFamily::PowerLaw:
      v = std::pow(static_cast<double>(n), 1.0 + p1_);
      break;
    case BdFamily::SpedUpMM1:
      v = lambda_rule_->at(n - 1) / p1_;
      break;
    case BdFamily::DesignedF: {
      const double fj = f_rule_->at(n);
      const double fprev = n >= 2 ? f_rule_->at(n - 1) : 0.0;
      if (!(fj > 0.0))
        throw InvalidDesignError("designed family requires f_j > 0");
      v = (lambda_rule_->at(n - 1) * fprev + 1.0) / fj;
      break;
    }
    default:
      v = mu_rule_->at(n);
  }
  if (!(v > 0.0))
    throw InvalidArgumentError("mu_" + std::to_string(n) +
                               " is not positive");
  return v;
}

double BirthDeathSpec::f_of(long j) const {
  if (family_ == BdFamily::DesignedF) return j >= 1 ? f_rule_->at(j) : 0.0;
  throw InvalidArgumentError("f_j is only defined for the designed family");
}

std::optional<bool> BirthDeathSpec::analytic_theta_finite() const {
  if (kind_ == TimeKind::Discrete) return false;  // every step costs time 1
  switch (family_) {
    case BdFamily::MM1:
      return false;  // every theta term equals 1/(mu - lambda)
    case BdFamily::PowerLaw:
      return false;  // f_j mu_j = j, so the terms are j / mu_j = j^-alpha
    default:
      return std::nullopt;
  }
}

std::optional<bool> BirthDeathSpec::analytic_necessary_finite() const {
  if (kind_ == TimeKind::Discrete) return false;  // mu_j < 1 for every j
  switch (family_) {
    case BdFamily::MM1:
      return false;  // constant terms 1/mu
    case BdFamily::MMInfinity:
      return false;  // harmonic: 1/(n mu)
    case BdFamily::PowerLaw:
      return true;  // p-series with exponent 1 + alpha
    default:
      return std::nullopt;
  }
}

std::optional<bool> BirthDeathSpec::analytic_B_finite() const {
  switch (family_) {
    case BdFamily::MM1:
      return p1_ < p2_;  // beta_n = rho^n
    case BdFamily::SpedUpMM1:
      return true;  // beta_n = rho^n with rho < 1 by construction
    case BdFamily::MMInfinity:
      return true;  // beta_n = (lambda/mu)^n / n!
    case BdFamily::PowerLaw:
      return true;  // beta_n = 1/mu_n, p-series
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// beta ladder and B

namespace {

struct BetaLadder {
  std::vector<double> beta;
  std::vector<double> log_beta;
  SeriesResult B;
};

void extend_beta(const BirthDeathSpec& spec, std::vector<double>& beta,
                 std::vector<double>& log_beta, long upto) {
  if (beta.empty()) {
    beta.push_back(1.0);
    log_beta.push_back(0.0);
  }
  while (static_cast<long>(beta.size()) <= upto) {
    const long n = static_cast<long>(beta.size());
    const double ratio = spec.lambda(n - 1) / spec.mu(n);
    beta.push_back(beta.back() * ratio);
    log_beta.push_back(log_beta.back() + std::log(ratio));
  }
}

BetaLadder compute_B(const BirthDeathSpec& spec, const ScanOptions& opts,
                     long min_terms = 0) {
  BetaLadder lad;
  if (spec.analytic_B_finite() == false) {
    lad.B = SeriesResult::diverged(
        DivergenceReason::Analytic, std::numeric_limits<double>::quiet_NaN(),
        0, "family closed form: normalizing series diverges");
    return lad;
  }
  auto term = [&](long n) {
    extend_beta(spec, lad.beta, lad.log_beta, n);
    return lad.beta[n];
  };
  lad.B = scan_series(term, 0, opts);
  if (lad.B.verdict == SeriesVerdict::Undecided &&
      spec.analytic_B_finite() == true)
    lad.B.note = "analytically convergent; value undecided at max_terms";
  extend_beta(spec, lad.beta, lad.log_beta,
              std::max<long>(min_terms, lad.B.terms_used - 1));
  return lad;
}

}  // namespace

BdStationary bd_stationary(const BirthDeathSpec& spec, long n_states,
                           ScanOptions opts) {
  if (n_states < 0)
    throw InvalidArgumentError("bd_stationary requires n_states >= 0");
  BetaLadder lad = compute_B(spec, opts, n_states);
  if (lad.B.verdict == SeriesVerdict::Diverged)
    throw NotPositiveRecurrentError(
        "normalizing series B diverges (" + std::string(to_string(lad.B.reason)) +
        "): the process is not positive recurrent");
  extend_beta(spec, lad.beta, lad.log_beta, n_states);
  BdStationary out;
  out.beta.assign(lad.beta.begin(), lad.beta.begin() + n_states + 1);
  out.log_beta.assign(lad.log_beta.begin(),
                      lad.log_beta.begin() + n_states + 1);
  out.B = lad.B;
  if (out.B.is_converged()) {
    out.pi.resize(n_states + 1);
    for (long n = 0; n <= n_states; ++n) out.pi[n] = out.beta[n] / out.B.value;
  }
  return out;
}

SeriesResult necessary_condition(const BirthDeathSpec& spec,
                                 ScanOptions opts) {
  if (spec.kind() == TimeKind::Discrete)
    return SeriesResult::diverged(
        DivergenceReason::Analytic, std::numeric_limits<double>::quiet_NaN(),
        0, "discrete time: mu_j < 1 for every j, so sum 1/mu_j diverges");
  if (spec.analytic_necessary_finite() == false)
    return SeriesResult::diverged(
        DivergenceReason::Analytic, std::numeric_limits<double>::quiet_NaN(),
        0, "family closed form: sum 1/mu_j diverges");
  return scan_series([&](long j) { return 1.0 / spec.mu(j); }, 1, opts);
}

SeriesResult theta_series(const BirthDeathSpec& spec, ScanOptions opts) {
  if (spec.kind() == TimeKind::Discrete)
    return SeriesResult::diverged(
        DivergenceReason::Analytic, std::numeric_limits<double>::quiet_NaN(),
        0,
        "discrete time: each transition takes a full step, E_n[theta_0] >= n "
        "is unbounded");
  if (spec.analytic_theta_finite() == false)
    return SeriesResult::diverged(
        DivergenceReason::Analytic, std::numeric_limits<double>::quiet_NaN(),
        0, "family closed form: theta series diverges");

  SeriesResult nc = necessary_condition(spec, opts);
  if (nc.verdict == SeriesVerdict::Diverged)
    return SeriesResult::diverged(
        DivergenceReason::NecessaryConditionFailed,
        std::numeric_limits<double>::quiet_NaN(), nc.terms_used,
        "sum 1/mu_j diverges, which theta dominates termwise");

  double f = 0.0;  // f_0
  auto term = [&, f](long j) mutable {
    f = (spec.lambda(j - 1) * f + 1.0) / spec.mu(j);
    return f;
  };
  return scan_series(term, 1, opts);
}

SeriesResult e_pi_theta0(const BirthDeathSpec& spec, ScanOptions opts) {
  SeriesResult theta = theta_series(spec, opts);
  if (!theta.is_converged())
    throw PreconditionUnmetError(
        "E_pi[theta_0] requires a converged theta series (verdict: " +
        std::string(to_string(theta.verdict)) + ")");

  BetaLadder lad = compute_B(spec, opts);
  if (lad.B.verdict == SeriesVerdict::Diverged)
    throw NotPositiveRecurrentError("normalizing series B diverges");
  if (!lad.B.is_converged())
    throw PreconditionUnmetError(
        "E_pi[theta_0] needs a converged normalizing series B");
  const double B = lad.B.value;

  // Tail remainders R_k = sum_{j>k} beta_j accumulated backward from the
  // ladder end; the last remainder is the fitted tail of the beta series.
  const int w = opts.window;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const long ext = static_cast<long>(lad.beta.size()) - 1 + 4 * w + 64;
    extend_beta(spec, lad.beta, lad.log_beta, ext);
    const long n_end = static_cast<long>(lad.beta.size()) - 1;

    std::vector<double> remainder(n_end + 1, 0.0);
    TailEstimate end_tail = estimate_tail(
        lad.beta.data() + (n_end - w), w + 1, n_end);
    double r = end_tail.usable ? end_tail.correction : 0.0;
    remainder[n_end] = r;
    for (long k = n_end - 1; k >= 0; --k)
      remainder[k] = remainder[k + 1] + lad.beta[k + 1];

    bool ran_off_ladder = false;
    auto term = [&](long k) {
      if (k >= n_end) {
        ran_off_ladder = true;
        return 0.0;
      }
      const double t = remainder[k];
      return t * t / (spec.lambda(k) * lad.beta[k] * B);
    };
    SeriesResult res = scan_series(term, 0, opts);
    if (!ran_off_ladder) return res;
    extend_beta(spec, lad.beta, lad.log_beta, 2 * n_end);
  }
  throw PreconditionUnmetError(
      "E_pi[theta_0] scan kept outrunning the beta ladder");
}

SeriesResult kemeny_bd(const BirthDeathSpec& spec, ScanOptions opts) {
  BetaLadder lad = compute_B(spec, opts);
  if (lad.B.verdict == SeriesVerdict::Diverged)
    throw NotPositiveRecurrentError(
        "normalizing series B diverges: the process is not positive "
        "recurrent");

  SeriesResult theta = theta_series(spec, opts);
  if (theta.verdict == SeriesVerdict::Diverged)
    return SeriesResult::diverged(theta.reason,
                                  std::numeric_limits<double>::quiet_NaN(),
                                  theta.terms_used, theta.note);
  if (theta.verdict == SeriesVerdict::Undecided)
    return SeriesResult::undecided(std::numeric_limits<double>::quiet_NaN(),
                                   theta.terms_used,
                                   "theta series undecided");
  if (!lad.B.is_converged())
    return SeriesResult::undecided(
        std::numeric_limits<double>::quiet_NaN(), lad.B.terms_used,
        "normalizing series value undecided at max_terms");

  SeriesResult epi = e_pi_theta0(spec, opts);
  if (!epi.is_converged())
    return SeriesResult::undecided(std::numeric_limits<double>::quiet_NaN(),
                                   epi.terms_used,
                                   "E_pi[theta_0] undecided");
  return SeriesResult::converged(theta.value - epi.value,
                                 std::max(theta.terms_used, epi.terms_used),
                                 theta.tail_bound + epi.tail_bound);
}

double hitting_from_zero(const BirthDeathSpec& spec, long j,
                         ScanOptions opts) {
  if (j < 0) throw InvalidArgumentError("hitting_from_zero requires j >= 0");
  if (j == 0) return 0.0;
  BetaLadder lad = compute_B(spec, opts, j);
  if (lad.B.verdict == SeriesVerdict::Diverged)
    throw NotPositiveRecurrentError("normalizing series B diverges");
  CompensatedSum outer;
  CompensatedSum prefix;  // S_k = sum_{l<=k} beta_l
  for (long k = 0; k < j; ++k) {
    prefix.add(lad.beta[k]);
    outer.add(prefix.value() / (spec.lambda(k) * lad.beta[k]));
  }
  return outer.value();
}

double taboo_sojourn(const BirthDeathSpec& spec, long j, ScanOptions opts) {
  if (spec.kind() != TimeKind::Continuous)
    throw InvalidArgumentError(
        "taboo sojourn times are defined for continuous specs");
  if (j < 0) throw InvalidArgumentError("taboo_sojourn requires j >= 0");
  if (j == 0) return 0.0;
  BetaLadder lad = compute_B(spec, opts, j);
  if (lad.B.verdict == SeriesVerdict::Diverged)
    throw NotPositiveRecurrentError("normalizing series B diverges");
  CompensatedSum sum;
  for (long k = 1; k <= j; ++k)
    sum.add(1.0 / (lad.beta[k] * spec.mu(k)));
  return lad.beta[j] * sum.value();
}

BirthDeathSpec design_from_f(RateRule f_rule, RateRule lambda_rule,
                             TimeKind kind) {
  return BirthDeathSpec::designed_f(std::move(f_rule),
                                    std::move(lambda_rule), kind);
}

MarkovChain truncate(const BirthDeathSpec& spec, long n_top) {
  if (n_top < 1) throw InvalidArgumentError("truncate requires N >= 1");
  const long m = n_top + 1;
  Matrix a = Matrix::Zero(m, m);
  if (spec.kind() == TimeKind::Discrete) {
    for (long n = 0; n < m; ++n) {
      const double mu = n >= 1 ? spec.mu(n) : 0.0;
      if (n < n_top) {
        const double lam = spec.lambda(n);
        a(n, n + 1) = lam;
        a(n, n) = 1.0 - lam - mu;
      } else {
        a(n, n) = 1.0 - mu;  // lambda_N folded into the holding probability
      }
      if (n >= 1) a(n, n - 1) = mu;
    }
  } else {
    for (long n = 0; n < m; ++n) {
      const double lam = n < n_top ? spec.lambda(n) : 0.0;
      const double mu = n >= 1 ? spec.mu(n) : 0.0;
      if (n < n_top) a(n, n + 1) = lam;
      if (n >= 1) a(n, n - 1) = mu;
      a(n, n) = -(lam + mu);
    }
  }
  return MarkovChain::validate(std::move(a), spec.kind());
}

}  // namespace kemeny
