#include <doctest.h>

#include <cstring>
#include <random>

#include "qmux/core.hpp"
#include "qmux/kv.hpp"

using namespace qmux;

TEST_CASE("validate_probability passes in-range values through") {
  CHECK(validate_probability(0.5) == 0.5);
  CHECK(validate_probability(0.0) == 0.0);
  CHECK(validate_probability(1.0) == 1.0);
  CHECK_THROWS_AS(validate_probability(1.2, "p"), ConfigError);
  CHECK_THROWS_AS(validate_probability(-0.1, "p"), ConfigError);
}

TEST_CASE("error messages name the offending field") {
  try {
    validate_probability(1.2, "eta_b");
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("eta_b") != std::string::npos);
  }
}

TEST_CASE("constructors reject NaN and infinities") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Efficiency{nan}, ConfigError);
  CHECK_THROWS_AS(Efficiency{inf}, ConfigError);
  CHECK_THROWS_AS(BrightState{nan}, ConfigError);
  CHECK_THROWS_AS(MeanPhotonNumber{-inf}, ConfigError);
  CHECK_THROWS_AS(LinkParams::make(Efficiency(0.5), nan, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(RatePoint::make(nan, 0.5), ConfigError);
}

TEST_CASE("LinkParams enforces positive times and idle >= active coherence") {
  CHECK_THROWS_AS(LinkParams::make(Efficiency(0.1), 0.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(LinkParams::make(Efficiency(0.1), 1.0, 2.0, 1.0), ConfigError);
  const LinkParams ok = LinkParams::make(Efficiency(0.1), 1e-6, 1e-3, 1.0);
  CHECK(ok.coherence_idle >= ok.coherence_active);
}

TEST_CASE("GainReport keeps gain equal to the rate ratio") {
  const GainReport r = GainReport::from_rates(3.0, 2.0, 5.0);
  CHECK(r.gain == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(GainReport::from_rates(1.0, 0.0, 1.0), InfeasibleError);
}

TEST_CASE("config round-trip is bitwise exact for doubles") {
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int trial = 0; trial < 500; ++trial) {
    const double v = std::ldexp(mantissa(gen), expo(gen));
    kv::Node node;
    node.set_number("x", v);
    const kv::Node back = kv::parse(kv::write(node));
    const double w = back.values.at("x").as_number("x");
    CHECK(std::memcmp(&v, &w, sizeof v) == 0);
  }
}

TEST_CASE("core types survive the external config format bitwise") {
  const LinkParams link = LinkParams::make(Efficiency(0.12345678901234567), 2.9999999999999997e-7,
                                           0.019999999999999997, 2.8000000000000003);
  kv::Node node;
  node.set_number("eta", link.eta.value());
  node.set_number("tau_e", link.attempt_duration);
  node.set_number("tau_ce", link.coherence_active);
  node.set_number("tau_co", link.coherence_idle);
  const kv::Node back = kv::parse(kv::write(node));
  const LinkParams link2 =
      LinkParams::make(Efficiency(back.values.at("eta").as_number("eta")),
                       back.values.at("tau_e").as_number("tau_e"),
                       back.values.at("tau_ce").as_number("tau_ce"),
                       back.values.at("tau_co").as_number("tau_co"));
  CHECK(std::memcmp(&link.attempt_duration, &link2.attempt_duration, sizeof(double)) == 0);
  CHECK(std::memcmp(&link.coherence_active, &link2.coherence_active, sizeof(double)) == 0);
  CHECK(std::memcmp(&link.coherence_idle, &link2.coherence_idle, sizeof(double)) == 0);
  const double e1 = link.eta.value(), e2 = link2.eta.value();
  CHECK(std::memcmp(&e1, &e2, sizeof(double)) == 0);
}

TEST_CASE("kv parser reports line and column") {
  try {
    kv::parse("a = 1\nb = \n");
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
  }
}

TEST_CASE("kv parser rejects duplicate keys") {
  CHECK_THROWS_AS(kv::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(kv::parse("s { x = 1 }\ns { y = 2 }\n"), ConfigError);
}

TEST_CASE("kv binder rejects unknown keys with the full path") {
  const kv::Node node = kv::parse("known = 1\nsec {\n  stray = 2\n}\n");
  kv::Binder b(node, "");
  CHECK(b.number("known") == 1.0);
  kv::Binder sec = b.section("sec");
  try {
    sec.finish();
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sec.stray") != std::string::npos);
  }
}

TEST_CASE("kv keeps 64-bit seeds intact") {
  kv::Node node;
  node.set_integer("seed", 18446744073709551557ull);
  const kv::Node back = kv::parse(kv::write(node));
  CHECK(back.values.at("seed").uint == 18446744073709551557ull);
}
