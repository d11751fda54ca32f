#include "rbqkd/entropy.hpp"
#include "rbqkd/keyrate.hpp"
#include "rbqkd/errors.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace rbqkd;
using rbqkd::test::h2;

namespace {
const double kTsirelson = 2.0 * std::sqrt(2.0);
}

TEST_CASE("routed rate golden values") {
  CHECK(std::abs(routed_bb84_rate({kTsirelson, 0.0, 0.0, 0.0}) - 1.0) < 1e-12);
  CHECK(std::abs(routed_bb84_rate({2.0, 0.0, 0.0, 0.0})) < 1e-12);
  for (int k = 0; k <= 11; ++k) {
    const double q = 0.01 * k;
    CHECK(std::abs(routed_bb84_rate({kTsirelson, 0.0, q, q}) - (1.0 - 2.0 * h2(q))) < 1e-12);
  }
}

TEST_CASE("routed rate decreases with marginal slack and noise") {
  CHECK(routed_bb84_rate({kTsirelson, 0.1, 0.0, 0.0}) < 1.0);
  CHECK(routed_bb84_rate({2.6, 0.0, 0.0, 0.0}) < routed_bb84_rate({2.7, 0.0, 0.0, 0.0}));
}

TEST_CASE("routed rate rejects out-of-range inputs") {
  CHECK_THROWS_AS(routed_bb84_rate({3.0, 0.0, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(routed_bb84_rate({2.5, -0.1, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(routed_bb84_rate({2.5, 0.0, 0.6, 0.0}), DomainError);
}

TEST_CASE("Shor-Preskill threshold") {
  const double q = shor_preskill_threshold();
  CHECK(std::abs(q - 0.1100) <= 1e-4);
  CHECK(std::abs(1.0 - 2.0 * h2(q)) < 1e-9);
  CHECK(shor_preskill_rate(0.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("Devetak-Winter and Fano helpers") {
  CHECK(devetak_winter(0.8, 0.3) == doctest::Approx(0.5));
  CHECK(devetak_winter(0.1, 0.3) == doctest::Approx(-0.2));
  CHECK(fano_bound(0.05) == doctest::Approx(h2(0.05)));
}

TEST_CASE("self-test rate chain") {
  const SelftestRate zero = selftest_rate(0.0, 0.0, 0.0);
  CHECK(zero.rate == doctest::Approx(1.0));
  CHECK(zero.secure);
  const SelftestRate r = selftest_rate(1e-8, 0.01, 0.01);
  CHECK(r.k1 == 111.0);
  CHECK(r.k2 == 222.0);
  CHECK(r.eta == doctest::Approx(111.0 * 1e-4));
  CHECK(r.constant == doctest::Approx((222.0 + 95.0) / std::log(2.0)));
  CHECK(r.rate == doctest::Approx(1.0 - 2.0 * h2(0.01) - r.constant * 1e-4).epsilon(1e-9));
  CHECK(selftest_rate(1e-2, 0.0, 0.0).rate < 0.0);
  CHECK_FALSE(selftest_rate(1e-2, 0.0, 0.0).secure);
}
