#include "kemeny/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kemeny/rng.hpp"
#include "parallel_detail.hpp"

namespace kemeny {
namespace {

// Row-wise cumulative sampling tables. Rows are scanned from their first
// positive column; the last slot is a sentinel so lookups always land.
struct RowSampler {
  long m;
  std::vector<double> cum;
  std::vector<long> first;

  RowSampler() : m(0) {}

  explicit RowSampler(const Matrix& p) : m(p.rows()), cum(m * m), first(m) {
    for (long i = 0; i < m; ++i) {
      long f = -1;
      double acc = 0.0;
      for (long j = 0; j < m; ++j) {
        if (p(i, j) > 0.0 && f < 0) f = j;
        acc += p(i, j);
        cum[i * m + j] = acc;
      }
      first[i] = std::max<long>(f, 0);
      cum[i * m + (m - 1)] = 2.0;  // sentinel
    }
  }

  long next(long s, double u) const {
    const double* row = cum.data() + s * m;
    long k = first[s];
    while (u >= row[k]) ++k;
    return k;
  }
};

struct CtmcTables {
  RowSampler jump;
  std::vector<double> inv_q;
};

CtmcTables make_ctmc_tables(const MarkovChain& chain) {
  const Matrix& q = chain.rates();
  const long m = q.rows();
  Matrix p = Matrix::Zero(m, m);
  CtmcTables t;
  t.inv_q.resize(m);
  for (long i = 0; i < m; ++i) {
    const double qi = -q(i, i);
    if (!(qi > 0.0))
      throw AbsorbingStateError(
          "state " + std::to_string(i) + " has zero exit rate", i);
    t.inv_q[i] = 1.0 / qi;
    for (long j = 0; j < m; ++j)
      if (j != i) p(i, j) = q(i, j) / qi;
  }
  t.jump = RowSampler(p);
  return t;
}

struct TrajectorySet {
  long start;
  long target;
  long count;
  long stream_offset;
};

const TrajectorySet& set_of(const std::vector<TrajectorySet>& sets,
                            size_t& cursor, long g) {
  while (g >= sets[cursor].stream_offset + sets[cursor].count) ++cursor;
  return sets[cursor];
}

// ---------------------------------------------------------------------------
// Interleaved range runners: a few independent trajectories advance in
// lockstep per thread so the RNG and log dependency chains overlap. Each
// trajectory consumes its own stream in a fixed order, so the statistics
// are identical under any lane or thread assignment.

constexpr int kLanes = 8;

void run_discrete_range(const RowSampler& sam,
                        const std::vector<TrajectorySet>& sets, long n,
                        long half_n, std::uint64_t seed, long lo, long hi,
                        double* full, double* half) {
  struct Lane {
    rng::Xoshiro256pp g{0, 0};
    long s = 0;
    long target = 0;
    long step = 0;
    double cnt = 0.0, half_cnt = 0.0;
    long idx = -1;
  };
  Lane lanes[kLanes];
  size_t cursor = 0;
  long next_idx = lo;
  int active = 0;

  auto load = [&](Lane& ln) {
    if (next_idx >= hi) {
      ln.idx = -1;
      return false;
    }
    const long g = next_idx++;
    const TrajectorySet& set = set_of(sets, cursor, g);
    ln.g = rng::Xoshiro256pp(seed, static_cast<std::uint64_t>(g));
    ln.s = set.start;
    ln.target = set.target;
    ln.step = 0;
    ln.cnt = ln.s == set.target ? 1.0 : 0.0;
    ln.half_cnt = ln.cnt;
    ln.idx = g;
    return true;
  };
  for (int l = 0; l < kLanes; ++l)
    if (load(lanes[l])) ++active;

  while (active > 0) {
    for (int l = 0; l < kLanes; ++l) {
      Lane& ln = lanes[l];
      if (ln.idx < 0) continue;
      if (ln.step >= n) {
        full[ln.idx] = ln.cnt;
        half[ln.idx] = ln.half_cnt;
        if (!load(ln)) --active;
        continue;
      }
      ++ln.step;
      ln.s = sam.next(ln.s, ln.g.uniform());
      if (ln.s == ln.target) {
        ln.cnt += 1.0;
        if (ln.step <= half_n) ln.half_cnt += 1.0;
      }
    }
  }
}

void run_ctmc_range(const CtmcTables& tab,
                    const std::vector<TrajectorySet>& sets, double t,
                    double half_t, std::uint64_t seed, long lo, long hi,
                    double* full, double* half) {
  struct Lane {
    rng::Xoshiro256pp g{0, 0};
    long s = 0;
    long target = 0;
    double elapsed = 0.0, occ = 0.0, occ_half = 0.0;
    long idx = -1;
  };
  Lane lanes[kLanes];
  size_t cursor = 0;
  long next_idx = lo;
  int active = 0;

  auto load = [&](Lane& ln) {
    if (next_idx >= hi) {
      ln.idx = -1;
      return false;
    }
    const long g = next_idx++;
    const TrajectorySet& set = set_of(sets, cursor, g);
    ln.g = rng::Xoshiro256pp(seed, static_cast<std::uint64_t>(g));
    ln.s = set.start;
    ln.target = set.target;
    ln.elapsed = 0.0;
    ln.occ = 0.0;
    ln.occ_half = 0.0;
    ln.idx = g;
    return true;
  };
  for (int l = 0; l < kLanes; ++l)
    if (load(lanes[l])) ++active;

  while (active > 0) {
    for (int l = 0; l < kLanes; ++l) {
      Lane& ln = lanes[l];
      if (ln.idx < 0) continue;
      const double hold =
          -rng::fast_log(1.0 - ln.g.uniform()) * tab.inv_q[ln.s];
      const double end = ln.elapsed + hold;
      if (ln.s == ln.target) {
        ln.occ += std::min(end, t) - ln.elapsed;
        if (ln.elapsed < half_t)
          ln.occ_half += std::min(end, half_t) - ln.elapsed;
      }
      if (end >= t) {
        full[ln.idx] = ln.occ;
        half[ln.idx] = ln.occ_half;
        if (!load(ln)) --active;
      } else {
        ln.elapsed = end;
        ln.s = tab.jump.next(ln.s, ln.g.uniform());
      }
    }
  }
}

struct SetMoments {
  double mean, var, mean_half, var_half;
  long count;
};

// Runs every set's trajectories over a single global index space; stats
// are stored per trajectory and reduced sequentially in index order, so
// the result is bitwise independent of the thread count.
std::vector<SetMoments> run_sets(const MarkovChain& chain,
                                 std::vector<TrajectorySet>& sets,
                                 double horizon, std::uint64_t seed) {
  long total = 0;
  for (auto& s : sets) {
    s.stream_offset = total;
    total += s.count;
  }
  std::vector<double> full(total), half(total);

  const bool discrete = chain.kind() == TimeKind::Discrete;
  RowSampler dsam;
  CtmcTables ctab;
  long n = 0, half_n = 0;
  const double half_t = horizon / 2.0;
  if (discrete) {
    dsam = RowSampler(chain.rates());
    n = static_cast<long>(horizon);
    half_n = n / 2;
  } else {
    ctab = make_ctmc_tables(chain);
  }

  const int threads = detail::default_threads();
  detail::parallel_slots(
      total, threads, threads, [&](long lo, long hi, int) {
        if (discrete)
          run_discrete_range(dsam, sets, n, half_n, seed, lo, hi,
                             full.data(), half.data());
        else
          run_ctmc_range(ctab, sets, horizon, half_t, seed, lo, hi,
                         full.data(), half.data());
      });

  std::vector<SetMoments> out;
  out.reserve(sets.size());
  for (const auto& set : sets) {
    auto moments = [&](const std::vector<double>& x) {
      double sum = 0.0, comp = 0.0;
      for (long r = 0; r < set.count; ++r) {
        double v = x[set.stream_offset + r];
        double t2 = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t2) + v : (v - t2) + sum;
        sum = t2;
      }
      const double mean = (sum + comp) / static_cast<double>(set.count);
      double ss = 0.0;
      for (long r = 0; r < set.count; ++r) {
        const double d = x[set.stream_offset + r] - mean;
        ss += d * d;
      }
      const double var =
          set.count > 1 ? ss / static_cast<double>(set.count - 1) : 0.0;
      return std::pair<double, double>(mean, var);
    };
    auto [mf, vf] = moments(full);
    auto [mh, vh] = moments(half);
    out.push_back({mf, vf, mh, vh, set.count});
  }
  return out;
}

void require_limit_preconditions(const MarkovChain& chain,
                                 const SimConfig& config, long needed_sets) {
  if (chain.kind() == TimeKind::Discrete && !chain.aperiodic())
    throw PeriodicChainError(
        "renewal-limit estimators require an aperiodic chain (period " +
        std::to_string(chain.period()) + ")");
  if (!(config.horizon >= 0.0))
    throw InvalidArgumentError("horizon must be nonnegative");
  if (chain.kind() == TimeKind::Discrete &&
      config.horizon != std::floor(config.horizon))
    throw InvalidArgumentError("discrete horizon must be an integer");
  if (config.trajectories < 2 * needed_sets)
    throw InvalidArgumentError(
        "trajectory budget too small: need at least 2 per set (" +
        std::to_string(2 * needed_sets) + ")");
}

std::vector<long> split_budget(long total, long sets) {
  std::vector<long> out(sets, total / sets);
  for (long s = 0; s < total % sets; ++s) ++out[s];
  return out;
}

}  // namespace

std::vector<double> simulate_path(const MarkovChain& chain, long start,
                                  double horizon, std::uint64_t seed,
                                  std::uint64_t stream) {
  const long m = chain.size();
  if (start < 0 || start >= m)
    throw InvalidArgumentError("start state out of range");
  if (!(horizon >= 0.0))
    throw InvalidArgumentError("horizon must be nonnegative");
  std::vector<double> occ(m, 0.0);
  rng::Xoshiro256pp g(seed, stream);
  if (chain.kind() == TimeKind::Discrete) {
    if (horizon != std::floor(horizon))
      throw InvalidArgumentError("discrete horizon must be an integer");
    const long n = static_cast<long>(horizon);
    RowSampler sam(chain.rates());
    long s = start;
    occ[s] += 1.0;
    for (long step = 1; step <= n; ++step) {
      s = sam.next(s, g.uniform());
      occ[s] += 1.0;
    }
  } else {
    CtmcTables tab = make_ctmc_tables(chain);
    long s = start;
    double elapsed = 0.0;
    for (;;) {
      const double hold = rng::exponential(g, tab.inv_q[s]);
      if (elapsed + hold >= horizon) {
        occ[s] += horizon - elapsed;  // final sojourn clipped
        break;
      }
      occ[s] += hold;
      elapsed += hold;
      s = tab.jump.next(s, g.uniform());
    }
  }
  return occ;
}

SimulationEstimate visit_deficit(const MarkovChain& chain, long start_i,
                                 long target_j, const SimConfig& config) {
  const long m = chain.size();
  if (start_i < 0 || start_i >= m || target_j < 0 || target_j >= m)
    throw InvalidArgumentError("visit_deficit state out of range");

  SimulationEstimate est;
  est.trajectories = config.trajectories;
  est.horizon = config.horizon;
  est.seed = config.seed;
  if (start_i == target_j) return est;  // both terms coincide exactly

  require_limit_preconditions(chain, config, 2);
  auto counts = split_budget(config.trajectories, 2);
  std::vector<TrajectorySet> sets = {
      {target_j, target_j, counts[0], 0},  // started in j
      {start_i, target_j, counts[1], 0},   // started in i
  };
  auto mom = run_sets(chain, sets, config.horizon, config.seed);

  est.value = mom[0].mean - mom[1].mean;
  est.std_error = std::sqrt(mom[0].var / mom[0].count +
                            mom[1].var / mom[1].count);
  const double v_half = mom[0].mean_half - mom[1].mean_half;
  const double se_half = std::sqrt(mom[0].var_half / mom[0].count +
                                   mom[1].var_half / mom[1].count);
  const double gap = std::abs(est.value - v_half);
  est.horizon_warning =
      gap > 3.0 * std::sqrt(est.std_error * est.std_error +
                            se_half * se_half) &&
      gap > 1e-12;
  return est;
}

SimulationEstimate step_count_identity(const MarkovChain& chain,
                                       const SimConfig& config) {
  const long m = chain.size();
  require_limit_preconditions(chain, config, m);
  auto counts = split_budget(config.trajectories, m);
  std::vector<TrajectorySet> sets;
  sets.reserve(m);
  for (long j = 0; j < m; ++j) sets.push_back({j, j, counts[j], 0});
  auto mom = run_sets(chain, sets, config.horizon, config.seed);

  const bool discrete = chain.kind() == TimeKind::Discrete;
  const double full_base =
      discrete ? config.horizon + 1.0 : config.horizon;
  const double half_base = discrete
                               ? std::floor(config.horizon / 2.0) + 1.0
                               : config.horizon / 2.0;

  double sum = 0.0, var = 0.0, sum_half = 0.0, var_half = 0.0;
  for (const auto& s : mom) {
    sum += s.mean;
    var += s.var / s.count;
    sum_half += s.mean_half;
    var_half += s.var_half / s.count;
  }

  SimulationEstimate est;
  est.trajectories = config.trajectories;
  est.horizon = config.horizon;
  est.seed = config.seed;
  est.value = sum - full_base;
  est.std_error = std::sqrt(var);
  const double v_half = sum_half - half_base;
  const double gap = std::abs(est.value - v_half);
  est.horizon_warning =
      gap > 3.0 * std::sqrt(var + var_half) && gap > 1e-12;
  return est;
}

}  // namespace kemeny
