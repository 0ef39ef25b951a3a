#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "flcqm/qos.hpp"

using namespace flcqm;

TEST_CASE("deadline miss ratio per Eq-style interval accounting") {
  SECTION("exact values") {
    const auto a = compute_dmr(50, 1.0, 0.010);
    CHECK(a.expected == 100);
    CHECK(a.dmr == 0.5);

    const auto b = compute_dmr(10, 1.0, 0.012);
    CHECK(b.expected == 83);
    CHECK(b.dmr == 10.0 / 83.0);

    const auto c = compute_dmr(0, 2.0, 0.050);
    CHECK(c.dmr == 0.0);
  }

  SECTION("ratio clamps at 1 when misses exceed the expected count") {
    const auto s = compute_dmr(120, 1.0, 0.010);
    CHECK(s.dmr == 1.0);
  }

  SECTION("preconditions") {
    CHECK_THROWS_AS(compute_dmr(1, 1.0, 0.0), InvalidPeriodError);
    CHECK_THROWS_AS(compute_dmr(1, 1.0, 0.6), InvalidPeriodError);  // t < 2h
    CHECK_THROWS_AS(compute_dmr(-1, 1.0, 0.010), InvalidPeriodError);
  }
}

TEST_CASE("initial state carries the defaults") {
  const auto st = initial_state(QosConfig{});
  CHECK(st.h == 0.010);
  CHECK(st.dmr_setpoint == 0.10);
  CHECK(st.t_flc == 1.0);
  CHECK(st.h_min == 0.002);
  CHECK(st.h_max == 0.100);
  CHECK(st.prev_error == 0.0);
  CHECK(st.interval_index == 0);

  QosConfig bad;
  bad.h_max = 0.6;  // > t_flc / 2
  CHECK_THROWS_AS(initial_state(bad), InvalidConfigError);

  QosConfig inverted;
  inverted.h_initial = 0.001;  // below h_min
  CHECK_THROWS_AS(initial_state(inverted), InvalidConfigError);
}

TEST_CASE("interval update drives the period") {
  const auto controller = default_controller();

  SECTION("equilibrium holds the period") {
    auto st = initial_state(QosConfig{});
    for (int k = 0; k < 2; ++k) {
      const auto sample = compute_dmr(10, st.t_flc, st.h, k);
      REQUIRE(sample.dmr == st.dmr_setpoint);
      const auto diag = on_interval_end(st, controller, sample);
      CHECK(std::abs(diag.e) < 1e-12);
      CHECK(std::abs(diag.dh) < 1e-12);
    }
    CHECK(st.h == Catch::Approx(0.010).margin(1e-12));
  }

  SECTION("full miss ratio saturates the error and grows the period") {
    auto st = initial_state(QosConfig{});
    auto sample = compute_dmr(100, st.t_flc, st.h, 0);
    REQUIRE(sample.dmr == 1.0);
    const auto diag = on_interval_end(st, controller, sample);
    CHECK(diag.e == Catch::Approx(-0.9));
    CHECK(diag.de == Catch::Approx(-0.9));
    CHECK(diag.dh > 2e-3);
    CHECK(diag.dh <= 3e-3);
    CHECK(st.h == Catch::Approx(0.010 + diag.dh));
    CHECK(st.interval_index == 1);
    CHECK(st.prev_error == diag.e);
  }

  SECTION("period clamps at h_max") {
    auto st = initial_state(QosConfig{});
    st.h = st.h_max;
    const auto sample = compute_dmr(10, st.t_flc, st.h, 0);  // dmr = 1
    on_interval_end(st, controller, sample);
    CHECK(st.h == st.h_max);
  }

  SECTION("interval index must match") {
    auto st = initial_state(QosConfig{});
    const auto sample = compute_dmr(0, st.t_flc, st.h, 3);
    CHECK_THROWS_AS(on_interval_end(st, controller, sample),
                    InvalidConfigError);
  }
}

TEST_CASE("period stays bounded under arbitrary miss sequences") {
  const auto controller = default_controller(4501);
  auto st = initial_state(QosConfig{});
  std::uint64_t z = 99;
  for (int k = 0; k < 200; ++k) {
    z = z * 6364136223846793005ull + 1442695040888963407ull;
    const std::int64_t expected = expected_samples(st.t_flc, st.h);
    const std::int64_t misses = static_cast<std::int64_t>(z >> 33) %
                                (2 * expected);
    const double h_before = st.h;
    const auto diag = on_interval_end(
        st, controller, compute_dmr(misses, st.t_flc, st.h, k));
    REQUIRE(st.h >= st.h_min);
    REQUIRE(st.h <= st.h_max);
    REQUIRE(st.h - h_before <= 3e-3 + 1e-12);
    REQUIRE(st.h - h_before >= -1.5e-3 - 1e-12);
    REQUIRE(std::abs(diag.dh) <= 3e-3 + 1e-12);
  }
}

TEST_CASE("control direction matches the rule table") {
  const auto controller = default_controller();

  // Miss ratio well above the setpoint: period must grow.
  auto high = initial_state(QosConfig{});
  const auto d1 = on_interval_end(high, controller,
                                  compute_dmr(30, 1.0, 0.010, 0));  // dmr 0.3
  CHECK(d1.dh > 0.0);

  // No misses at setpoint 0.1: period must not grow.
  auto low = initial_state(QosConfig{});
  const auto d2 = on_interval_end(low, controller,
                                  compute_dmr(0, 1.0, 0.010, 0));
  CHECK(d2.dh <= 0.0);
}
