#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace kemeny::detail {

inline int default_threads() {
  if (const char* env = std::getenv("KEMENY_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Splits [0, n) into exactly min(slots, n) contiguous ranges and runs
// fn(lo, hi, slot) for each, distributing slots over up to `threads` OS
// threads by a static stride. The slot partition is a function of (n,
// slots) alone, so per-slot results combined in slot order are bitwise
// independent of the thread count and of scheduling.
inline void parallel_slots(long n, int slots, int threads,
                           const std::function<void(long, long, int)>& fn) {
  if (n <= 0) return;
  const int s = static_cast<int>(std::min<long>(std::max(slots, 1), n));
  const long chunk = (n + s - 1) / s;
  auto run_slot = [&](int slot) {
    const long lo = slot * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo < hi) fn(lo, hi, slot);
  };
  const int t = std::min(std::max(threads, 1), s);
  if (t <= 1) {
    for (int slot = 0; slot < s; ++slot) run_slot(slot);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int tid = 0; tid < t; ++tid)
    pool.emplace_back([&, tid] {
      for (int slot = tid; slot < s; slot += t) run_slot(slot);
    });
  for (auto& th : pool) th.join();
}

// Number of reduction slots used by the analysis kernels; fixed so that
// sums over slot partials do not depend on the machine's thread count.
inline constexpr int kAnalysisSlots = 64;

}  // namespace kemeny::detail
