#include "kemeny/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kemeny/errors.hpp"

namespace kemeny {

SeriesResult SeriesResult::converged(double v, long n, double tail,
                                     std::string note) {
  return {SeriesVerdict::Converged, v, n, tail, DivergenceReason::None,
          std::move(note)};
}
SeriesResult SeriesResult::diverged(DivergenceReason r, double partial,
                                    long n, std::string note) {
  return {SeriesVerdict::Diverged, partial, n, 0.0, r, std::move(note)};
}
SeriesResult SeriesResult::undecided(double partial, long n,
                                     std::string note) {
  return {SeriesVerdict::Undecided, partial, n, 0.0,
          DivergenceReason::None, std::move(note)};
}

const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Converged: return "converged";
    case SeriesVerdict::Diverged: return "diverged";
    default: return "undecided";
  }
}

const char* to_string(DivergenceReason r) {
  switch (r) {
    case DivergenceReason::Analytic: return "analytic";
    case DivergenceReason::NecessaryConditionFailed:
      return "necessary_condition_failed";
    case DivergenceReason::HeuristicGrowth: return "heuristic_growth";
    default: return "none";
  }
}

namespace {

constexpr double kGeometricRatioCap = 0.999;

double geom_sum(double r) { return r / (1.0 - r); }

}  // namespace

TailEstimate estimate_tail(const double* terms, int count, long last_index) {
  TailEstimate est;
  if (count < 3) return est;
  const double last = terms[count - 1];
  if (!(last > 0.0)) {
    // terms vanished (underflow); nothing measurable remains
    est.usable = true;
    est.correction = 0.0;
    est.residual = std::numeric_limits<double>::min();
    return est;
  }

  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  double rlast = 0.0;
  for (int i = 1; i < count; ++i) {
    if (!(terms[i - 1] > 0.0)) return est;
    const double r = terms[i] / terms[i - 1];
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    rlast = r;
  }

  if (rmax < kGeometricRatioCap) {
    est.usable = true;
    est.correction = last * geom_sum(rlast);
    est.residual = last * (geom_sum(rmax) - geom_sum(rmin)) +
                   4.0 * std::numeric_limits<double>::epsilon() * last;
    return est;
  }

  // Ratios near one: fit term ~ c k^-p from consecutive ratios and use a
  // midpoint integral for the tail.
  double pmin = std::numeric_limits<double>::infinity();
  double pmax = -pmin;
  double plast = 0.0;
  for (int i = 1; i < count; ++i) {
    const long k = last_index - (count - 1) + i;
    const double r = terms[i] / terms[i - 1];
    if (!(r > 0.0) || k < 2) return est;
    const double p = -std::log(r) / std::log1p(1.0 / double(k - 1));
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
    plast = p;
  }
  if (!(pmin > 1.01)) return est;
  const double spread = pmax - pmin;
  if (spread > 0.02 * (1.0 + plast)) return est;

  const double k = static_cast<double>(last_index);
  // sum_{j>k} c j^-p with c = last * k^p, integrated from k+1/2
  const double corr =
      last * std::exp(plast * std::log(k / (k + 0.5))) * (k + 0.5) /
      (plast - 1.0);
  est.usable = true;
  est.correction = corr;
  est.residual =
      corr * (spread * (std::log(k + 0.5) + 2.0 + 1.0 / (plast - 1.0)) +
              plast * plast / (4.0 * k * k));
  return est;
}

SeriesResult scan_series(const std::function<double(long)>& term,
                         long first_index, const ScanOptions& opts) {
  if (opts.window < 3 || opts.max_terms < 1 || !(opts.rtol > 0.0))
    throw InvalidArgumentError("bad series scan options");

  const int w = opts.window;
  std::vector<double> ring(static_cast<size_t>(w) + 1, 0.0);
  CompensatedSum acc;
  int filled = 0;
  int small_streak = 0;
  int growth_streak = 0;
  int zero_streak = 0;

  for (long n = 0; n < opts.max_terms; ++n) {
    const long k = first_index + n;
    const double t = term(k);
    if (std::isnan(t) || t < 0.0)
      throw InvalidArgumentError(
          "series term at index " + std::to_string(k) +
          " is negative or NaN; scan requires nonnegative terms");
    if (std::isinf(t))
      return SeriesResult::diverged(DivergenceReason::HeuristicGrowth,
                                    acc.value(), n + 1,
                                    "term overflowed to infinity");
    const double prev = filled > 0 ? ring[(filled - 1) % (w + 1)] : 0.0;
    ring[filled % (w + 1)] = t;
    ++filled;
    acc.add(t);
    const double partial = acc.value();

    if (t == 0.0)
      ++zero_streak;
    else
      zero_streak = 0;
    if (zero_streak >= w)
      return SeriesResult::converged(partial, n + 1,
                                     std::numeric_limits<double>::min(),
                                     "terms vanished");

    if (filled > 1 && prev > 0.0 && t >= prev)
      ++growth_streak;
    else
      growth_streak = 0;
    if (growth_streak >= w)
      return SeriesResult::diverged(
          DivergenceReason::HeuristicGrowth, partial, n + 1,
          "term ratios stayed >= 1 across the window");

    const double floor = std::max(std::abs(partial),
                                  std::numeric_limits<double>::min());
    if (t <= opts.rtol * floor)
      ++small_streak;
    else
      small_streak = 0;

    if (small_streak >= w && filled >= w + 1) {
      // copy the window in chronological order
      std::vector<double> win(static_cast<size_t>(w) + 1);
      for (int i = 0; i <= w; ++i)
        win[i] = ring[(filled - 1 - w + i) % (w + 1)];
      TailEstimate tail = estimate_tail(win.data(), w + 1, k);
      if (tail.usable) {
        const double value = partial + tail.correction;
        const double bound =
            tail.residual +
            4.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
        if (bound <= opts.rtol * std::max(std::abs(value),
                                          std::numeric_limits<double>::min()))
          return SeriesResult::converged(value, n + 1, bound);
      }
    }
  }
  return SeriesResult::undecided(acc.value(), opts.max_terms,
                                 "no verdict within max_terms");
}

}  // namespace kemeny
