#pragma once

#include <cmath>
#include <functional>
#include <string>

namespace kemeny {

enum class SeriesVerdict { Converged, Diverged, Undecided };

enum class DivergenceReason {
  None,
  Analytic,                  // supplied by a family in closed form
  NecessaryConditionFailed,  // sum of 1/mu_j diverges
  HeuristicGrowth,           // term ratios stayed >= 1 while partials grew
};

/// Outcome of evaluating an infinite series of nonnegative terms.
/// Converged results carry value = partial sum + tail correction and a
/// bound on the remaining error; Diverged/Undecided carry the partial sum
/// accumulated so far (NaN when no scan ran).
struct SeriesResult {
  SeriesVerdict verdict = SeriesVerdict::Undecided;
  double value = 0.0;
  long terms_used = 0;
  double tail_bound = 0.0;
  DivergenceReason reason = DivergenceReason::None;
  std::string note;

  bool is_converged() const { return verdict == SeriesVerdict::Converged; }

  static SeriesResult converged(double v, long n, double tail,
                                std::string note = {});
  static SeriesResult diverged(DivergenceReason r, double partial, long n,
                               std::string note = {});
  static SeriesResult undecided(double partial, long n,
                                std::string note = {});
};

const char* to_string(SeriesVerdict v);
const char* to_string(DivergenceReason r);

struct ScanOptions {
  double rtol = 1e-12;
  long max_terms = 10'000'000;
  int window = 20;  // consecutive terms that must pass every gate
};

/// Estimated remaining tail of a positive-term series from its trailing
/// behaviour: geometric model when recent ratios stay below 0.999,
/// power-law model (term ~ c k^-p, p > 1) otherwise.
struct TailEstimate {
  bool usable = false;
  double correction = 0.0;  // added to the partial sum
  double residual = 0.0;    // bound on the correction's own error
};

/// Tail model fitted to the last `count` terms terms[0..count-1] at
/// indices ending at `last_index` (terms[count-1] is the term at
/// last_index).
TailEstimate estimate_tail(const double* terms, int count, long last_index);

/// Scans term(k) for k = first_index, first_index+1, ... with compensated
/// summation. Verdict protocol: Converged when `window` consecutive terms
/// each fall below rtol * partial AND the fitted tail model's residual is
/// below rtol * (partial + correction); Diverged(HeuristicGrowth) when
/// ratios stay >= 1 across a full window; Undecided at max_terms. The term
/// callback is invoked exactly once per index, in increasing order, so it
/// may carry recurrence state.
SeriesResult scan_series(const std::function<double(long)>& term,
                         long first_index, const ScanOptions& opts);

/// Compensated (Neumaier) accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace kemeny
