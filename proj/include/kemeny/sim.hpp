#pragma once

#include <cstdint>
#include <vector>

#include "kemeny/chain.hpp"

namespace kemeny {

/// Trajectory budget and stream addressing for one estimator call.
/// `trajectories` is the total budget; the estimator divides it evenly
/// across the trajectory sets it needs (two sets for the visit deficit,
/// one per state for the step-count identity). Every trajectory draws
/// from its own stream derived from (seed, global trajectory index), so
/// results are bitwise identical under any thread count.
struct SimConfig {
  double horizon = 0.0;   // steps n (Discrete) or time t (Continuous)
  long trajectories = 1;  // total trajectory budget R
  std::uint64_t seed = 0;
};

struct SimulationEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long trajectories = 0;  // R as configured
  double horizon = 0.0;
  std::uint64_t seed = 0;
  /// set when the half-horizon estimate disagrees with the full-horizon
  /// one beyond 3 combined standard errors (horizon likely too short)
  bool horizon_warning = false;
};

/// One trajectory: per-state visit counts over times 0..n (Discrete,
/// counts sum to n+1 exactly) or per-state occupation times over [0, t]
/// with the final sojourn clipped (Continuous, sums to t).
std::vector<double> simulate_path(const MarkovChain& chain, long start,
                                  double horizon, std::uint64_t seed,
                                  std::uint64_t stream = 0);

/// Visit-deficit estimator of pi_j E_i[theta_j]: mean of N_j over paths
/// started in j minus the same started in i (occupation times M_j in
/// continuous time), paired across a common horizon with independent
/// streams for the two sets. Exact zero when i == j. Discrete chains must
/// be aperiodic (PeriodicChainError).
SimulationEstimate visit_deficit(const MarkovChain& chain, long start_i,
                                 long target_j, const SimConfig& config);

/// Step-count estimator of K': sum_j mean of N_j over paths started in j,
/// minus (n+1) — resp. sum_j M_j minus t. No start-state parameter by
/// construction. Discrete chains must be aperiodic.
SimulationEstimate step_count_identity(const MarkovChain& chain,
                                       const SimConfig& config);

}  // namespace kemeny
