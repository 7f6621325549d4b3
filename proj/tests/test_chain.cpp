#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "corpus.hpp"
#include "kemeny/chain.hpp"
#include "oracles.hpp"

using namespace kemeny;

namespace {

MarkovChain two_state_symmetric() {
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  return MarkovChain::validate(p, TimeKind::Discrete);
}

MarkovChain two_state_generator(double a, double b) {
  Matrix q(2, 2);
  q << -a, a, b, -b;
  return MarkovChain::validate(q, TimeKind::Continuous);
}

MarkovChain triangle_walk() {
  Matrix p(3, 3);
  p << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  return MarkovChain::validate(p, TimeKind::Discrete);
}

}  // namespace

TEST_CASE("validate accepts the symmetric two-state chain, aperiodic") {
  auto chain = two_state_symmetric();
  CHECK(chain.kind() == TimeKind::Discrete);
  CHECK(chain.size() == 2);
  CHECK(chain.aperiodic());
}

TEST_CASE("validate flags the period-2 cycle but accepts it") {
  Matrix p(2, 2);
  p << 0, 1, 1, 0;
  auto chain = MarkovChain::validate(p, TimeKind::Discrete);
  CHECK_FALSE(chain.aperiodic());
  CHECK(chain.period() == 2);
}

TEST_CASE("validate accepts a generator with zero row sums") {
  Matrix q(2, 2);
  q << -1, 1, 2, -2;
  auto chain = MarkovChain::validate(q, TimeKind::Continuous);
  CHECK(chain.kind() == TimeKind::Continuous);
  CHECK(chain.aperiodic());
}

TEST_CASE("validate rejects with the full violation list") {
  Matrix p(2, 2);
  p << 0.8, 0.1, -0.2, 1.2;  // row 0 short, row 1 negative entry
  try {
    MarkovChain::validate(p, TimeKind::Discrete);
    FAIL("expected ChainValidationError");
  } catch (const ChainValidationError& e) {
    bool saw_rowsum = false, saw_negative = false;
    for (const auto& v : e.violations()) {
      if (v.code == Violation::Code::RowSum) {
        saw_rowsum = true;
        CHECK(v.row == 0);
        CHECK(v.deviation == doctest::Approx(-0.1));
      }
      if (v.code == Violation::Code::NegativeEntry) saw_negative = true;
    }
    CHECK(saw_rowsum);
    CHECK(saw_negative);
  }
}

TEST_CASE("validate rejects reducible chains and names the component") {
  Matrix p(3, 3);
  p << 1, 0, 0, 0, 0.5, 0.5, 0, 0.5, 0.5;
  try {
    MarkovChain::validate(p, TimeKind::Discrete);
    FAIL("expected ChainValidationError");
  } catch (const ChainValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].code == Violation::Code::NotIrreducible);
    CHECK_FALSE(e.violations()[0].component.empty());
  }
}

TEST_CASE("row-sum tolerance is relative to row magnitude") {
  Matrix q(2, 2);
  const double big = 1e15;
  q << -big, big + 1e-2, 2, -2;  // absolute error 1e-2, relative 1e-17
  CHECK_NOTHROW(MarkovChain::validate(q, TimeKind::Continuous));
  Matrix bad(2, 2);
  bad << -1, 1 + 1e-9, 2, -2;
  CHECK_THROWS_AS(MarkovChain::validate(bad, TimeKind::Continuous),
                  ChainValidationError);
}

TEST_CASE("m = 1 chains are accepted") {
  Matrix p(1, 1);
  p << 1.0;
  auto chain = MarkovChain::validate(p, TimeKind::Discrete);
  CHECK(chain.aperiodic());
  Matrix q(1, 1);
  q << 0.0;
  CHECK_NOTHROW(MarkovChain::validate(q, TimeKind::Continuous));
}

TEST_CASE("stationary distribution of symmetric chains is uniform") {
  auto st = stationary_distribution(two_state_symmetric());
  CHECK(st.pi(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(st.pi(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(st.residual <= 1e-14);

  auto stc = stationary_distribution(two_state_generator(1.0, 1.0));
  CHECK(stc.pi(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(stc.pi(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("triangle walk stationary matches the power-iteration oracle") {
  auto chain = triangle_walk();
  auto st = stationary_distribution(chain);
  auto oracle = oracles::power_iteration_pi(chain.rates());
  for (long i = 0; i < 3; ++i)
    CHECK(st.pi(i) == doctest::Approx(oracle(i)).epsilon(1e-13));
  CHECK(st.pi(0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("stationary solve is bitwise deterministic") {
  kemeny::rng::Xoshiro256pp g(7, 0);
  auto chain = corpus::random_dtmc(g, 37, true);
  auto a = stationary_distribution(chain);
  auto b = stationary_distribution(chain);
  CHECK(std::memcmp(a.pi.data(), b.pi.data(), sizeof(double) * 37) == 0);
  CHECK(a.residual == b.residual);
}

TEST_CASE("jump chain of a two-state generator is the flip chain") {
  auto chain = two_state_generator(1.0, 2.0);
  auto jump = jump_chain(chain);
  CHECK(jump.kind() == TimeKind::Discrete);
  CHECK(jump.rates()(0, 0) == 0.0);
  CHECK(jump.rates()(0, 1) == doctest::Approx(1.0));
  CHECK(jump.rates()(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("jump chain splits rates proportionally") {
  Matrix q(3, 3);
  q << -2, 1, 1, 2, -2, 0, 2, 0, -2;
  auto jump = jump_chain(MarkovChain::validate(q, TimeKind::Continuous));
  CHECK(jump.rates()(0, 1) == doctest::Approx(0.5));
  CHECK(jump.rates()(0, 2) == doctest::Approx(0.5));
}

TEST_CASE("jump chain rows sum to one and keep the off-diagonal digraph") {
  kemeny::rng::Xoshiro256pp g(11, 0);
  for (int rep = 0; rep < 20; ++rep) {
    auto chain = corpus::random_ctmc(g, 2 + long(g.uniform() * 30), true);
    auto jump = jump_chain(chain);
    const long m = chain.size();
    for (long i = 0; i < m; ++i) {
      CHECK(jump.rates().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(jump.rates()(i, i) == 0.0);
      for (long j = 0; j < m; ++j)
        if (i != j)
          CHECK((jump.rates()(i, j) > 0.0) == (chain.rates()(i, j) > 0.0));
    }
  }
}

TEST_CASE("jump chain reports absorbing states") {
  // the only validated chain with a zero exit rate is the single state
  Matrix q(1, 1);
  q << 0.0;
  auto chain = MarkovChain::validate(q, TimeKind::Continuous);
  CHECK_THROWS_AS(jump_chain(chain), AbsorbingStateError);
}

TEST_CASE("validated row sums stay within tolerance") {
  kemeny::rng::Xoshiro256pp g(13, 0);
  for (int rep = 0; rep < 10; ++rep) {
    auto chain = corpus::random_dtmc(g, 2 + long(g.uniform() * 60), false);
    for (long i = 0; i < chain.size(); ++i)
      CHECK(std::abs(chain.rates().row(i).sum() - 1.0) <= 1e-12);
  }
}
