#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "kemeny/analysis.hpp"
#include "kemeny/rng.hpp"
#include "kemeny/sim.hpp"

using namespace kemeny;

namespace {

MarkovChain two_state_symmetric() {
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  return MarkovChain::validate(p, TimeKind::Discrete);
}

MarkovChain two_state_generator() {
  Matrix q(2, 2);
  q << -1, 1, 1, -1;
  return MarkovChain::validate(q, TimeKind::Continuous);
}

MarkovChain triangle_walk() {
  Matrix p(3, 3);
  p << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  return MarkovChain::validate(p, TimeKind::Discrete);
}

MarkovChain one_state() {
  Matrix p(1, 1);
  p << 1.0;
  return MarkovChain::validate(p, TimeKind::Discrete);
}

MarkovChain flip_chain() {
  Matrix p(2, 2);
  p << 0, 1, 1, 0;
  return MarkovChain::validate(p, TimeKind::Discrete);
}

}  // namespace

TEST_CASE("fast_log tracks std::log closely enough for sampling") {
  kemeny::rng::Xoshiro256pp g(99, 0);
  double worst = 0.0;
  for (int i = 0; i < 200'000; ++i) {
    const double u = g.uniform();
    const double x = 1.0 - u;
    worst = std::max(worst, std::abs(rng::fast_log(x) - std::log(x)));
  }
  for (double x : {1.0, 0.5, 2.0 / 3, 1e-10, 1e-300, 0x1p-53})
    worst = std::max(worst, std::abs(rng::fast_log(x) - std::log(x)));
  CHECK(worst <= 1e-11);
}

TEST_CASE("single-state path: all time in one state") {
  auto occ = simulate_path(one_state(), 0, 10, 1);
  CHECK(occ[0] == 11.0);  // counts times 0..10
}

TEST_CASE("zero-horizon discrete path counts only the start") {
  auto occ = simulate_path(two_state_symmetric(), 1, 0, 7);
  CHECK(occ[0] == 0.0);
  CHECK(occ[1] == 1.0);
}

TEST_CASE("discrete path counts always sum to n+1") {
  auto chain = triangle_walk();
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto occ = simulate_path(chain, 0, 137, 5, s);
    CHECK(occ[0] + occ[1] + occ[2] == 138.0);  // exact integer arithmetic
  }
}

TEST_CASE("continuous path occupancy sums to the horizon") {
  auto chain = two_state_generator();
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto occ = simulate_path(chain, 0, 500.0, 11, s);
    CHECK(occ[0] + occ[1] == doctest::Approx(500.0).epsilon(1e-10));
  }
}

TEST_CASE("long-run occupation fraction approaches pi") {
  auto chain = two_state_symmetric();
  const long n = 10000, paths = 5000;
  double sum = 0.0, sumsq = 0.0;
  for (long r = 0; r < paths; ++r) {
    auto occ = simulate_path(chain, 0, double(n), 2024, r);
    const double frac = occ[1] / double(n + 1);
    sum += frac;
    sumsq += frac * frac;
  }
  const double mean = sum / paths;
  const double var = (sumsq - paths * mean * mean) / (paths - 1);
  const double se = std::sqrt(var / paths);
  CHECK(std::abs(mean - 0.5) <= 3.0 * se);
}

TEST_CASE("visit deficit short-circuits at i == j") {
  SimConfig cfg{100.0, 1000, 5};
  auto est = visit_deficit(two_state_symmetric(), 1, 1, cfg);
  CHECK(est.value == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("visit deficit: two-state chain estimates pi_1 E_0[theta_1] = 1") {
  SimConfig cfg{500.0, 40000, 42};
  auto est = visit_deficit(two_state_symmetric(), 0, 1, cfg);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.value - 1.0) <= 3.0 * est.std_error);
  CHECK_FALSE(est.horizon_warning);
}

TEST_CASE("visit deficit: triangle walk estimates 2/3") {
  SimConfig cfg{400.0, 60000, 7};
  auto est = visit_deficit(triangle_walk(), 0, 2, cfg);
  CHECK(std::abs(est.value - 2.0 / 3) <= 3.0 * est.std_error);
}

TEST_CASE("visit deficit: continuous chain estimates pi_j E_i[theta_j]") {
  SimConfig cfg{300.0, 40000, 11};
  auto est = visit_deficit(two_state_generator(), 0, 1, cfg);
  // pi_1 E_0[theta_1] = 0.5 * 1
  CHECK(std::abs(est.value - 0.5) <= 3.0 * est.std_error);
}

TEST_CASE("step count: two-state chain estimates K' = 1") {
  SimConfig cfg{500.0, 40000, 42};
  auto est = step_count_identity(two_state_symmetric(), cfg);
  CHECK(std::abs(est.value - 1.0) <= 3.0 * est.std_error);
}

TEST_CASE("step count: two-state generator estimates K' = 1/2") {
  SimConfig cfg{300.0, 40000, 9};
  auto est = step_count_identity(two_state_generator(), cfg);
  CHECK(std::abs(est.value - 0.5) <= 3.0 * est.std_error);
}

TEST_CASE("step count: single-state chain is exactly zero") {
  for (double horizon : {0.0, 5.0, 50.0}) {
    SimConfig cfg{horizon, 10, 3};
    auto est = step_count_identity(one_state(), cfg);
    CHECK(est.value == 0.0);
    CHECK(est.std_error == 0.0);
  }
}

TEST_CASE("periodic chains are rejected by the limit estimators only") {
  auto chain = flip_chain();
  SimConfig cfg{100.0, 100, 1};
  CHECK_THROWS_AS(visit_deficit(chain, 0, 1, cfg), PeriodicChainError);
  CHECK_THROWS_AS(step_count_identity(chain, cfg), PeriodicChainError);
  CHECK_NOTHROW(simulate_path(chain, 0, 100, 1));
}

TEST_CASE("estimates are bitwise reproducible across thread counts") {
  auto chain = two_state_generator();
  SimConfig cfg{200.0, 20000, 31337};
  setenv("KEMENY_THREADS", "1", 1);
  auto a = step_count_identity(chain, cfg);
  auto d1 = visit_deficit(chain, 0, 1, cfg);
  setenv("KEMENY_THREADS", "4", 1);
  auto b = step_count_identity(chain, cfg);
  auto d2 = visit_deficit(chain, 0, 1, cfg);
  unsetenv("KEMENY_THREADS");
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(d1.value == d2.value);
  CHECK(d1.std_error == d2.std_error);
}

TEST_CASE("two long horizons agree within combined errors") {
  auto chain = triangle_walk();
  SimConfig c1{300.0, 30000, 8};
  SimConfig c2{900.0, 30000, 9};
  auto e1 = step_count_identity(chain, c1);
  auto e2 = step_count_identity(chain, c2);
  CHECK(std::abs(e1.value - e2.value) <=
        3.0 * std::sqrt(e1.std_error * e1.std_error +
                        e2.std_error * e2.std_error));
}

TEST_CASE("calibration: estimators land within 3 SE in >= 99/100 seeds") {
  auto chain = two_state_symmetric();
  const double exact_deficit = 1.0;  // pi_1 E_0[theta_1]
  const double exact_kprime = 1.0;
  int ok_deficit = 0, ok_step = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SimConfig cfg{500.0, 4000, 1000 + seed};
    auto d = visit_deficit(chain, 0, 1, cfg);
    auto s = step_count_identity(chain, cfg);
    if (std::abs(d.value - exact_deficit) <= 3.0 * d.std_error) ++ok_deficit;
    if (std::abs(s.value - exact_kprime) <= 3.0 * s.std_error) ++ok_step;
  }
  CHECK(ok_deficit >= 99);
  CHECK(ok_step >= 99);
}

TEST_CASE("horizon diagnostics flag an undersized horizon") {
  // slow chain: leaving either state is rare, so visits to 1 within a
  // short window depend strongly on the start
  Matrix p(2, 2);
  p << 0.995, 0.005, 0.005, 0.995;
  auto chain = MarkovChain::validate(p, TimeKind::Discrete);
  SimConfig short_cfg{40.0, 20000, 5};
  auto est = visit_deficit(chain, 0, 1, short_cfg);
  CHECK(est.horizon_warning);
}
