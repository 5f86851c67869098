#include <doctest.h>

#include <cmath>
#include <random>

#include "qmux/protocols.hpp"

using namespace qmux;
using namespace qmux::protocols;

namespace {

TableInputs rsp_inputs(double eta_c, double eta_s, double alpha2) {
  TableInputs in;
  in.eta_c = Efficiency(eta_c);
  in.eta_s = Efficiency(eta_s);
  in.alpha2 = MeanPhotonNumber(alpha2);
  return in;
}

}  // namespace

TEST_CASE("single click RSP row") {
  const AttemptStats st = table_stats(ProtocolKind::single_click_rsp, rsp_inputs(1e-3, 0.1, 0.5));
  CHECK(st.p_success == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(st.fidelity == doctest::Approx(1.0 - 1.15625e-3).epsilon(1e-12));
  CHECK(!st.clamped);
}

TEST_CASE("single click EG row") {
  TableInputs in;
  in.eta_a = Efficiency(0.3);
  in.eta_b = Efficiency(0.2);
  in.xi2 = BrightState(0.0);
  const AttemptStats st = table_stats(ProtocolKind::single_click_eg, in);
  CHECK(st.p_success == 0.0);
  CHECK(st.fidelity == 1.0);

  in.xi2 = BrightState(0.1);
  const AttemptStats on = table_stats(ProtocolKind::single_click_eg, in);
  CHECK(on.p_success == doctest::Approx(2.0 * 0.3 * 0.2 * 0.1));
  CHECK(on.fidelity == doctest::Approx(0.9));
}

TEST_CASE("double click and double-single click rows") {
  const AttemptStats dc = table_stats(ProtocolKind::double_click_rsp, rsp_inputs(0.01, 0.2, 0.1));
  CHECK(dc.p_success == doctest::Approx(0.01 * 0.2 * 0.1 / 2.0));
  CHECK(dc.fidelity == doctest::Approx(1.0 - (0.01 / 0.2) * (4.0 - 0.6) / 16.0 * 0.1));

  const AttemptStats dsc =
      table_stats(ProtocolKind::double_single_click_rsp, rsp_inputs(0.01, 0.2, 0.1));
  CHECK(dsc.p_success == doctest::Approx((4.0 / 3.0) * 0.01 * 0.1));
  CHECK(dsc.fidelity == doctest::Approx(1.0 - (0.01 / 0.2) * (4.0 - 0.6) / 8.0 * 0.1));
}

TEST_CASE("measurement-only RSP row") {
  const AttemptStats st =
      table_stats(ProtocolKind::measurement_only_rsp, rsp_inputs(0.5, 0.5, 0.0));
  CHECK(st.p_success == doctest::Approx(0.25));
  CHECK(st.fidelity == 1.0);
}

TEST_CASE("missing parameters are named") {
  TableInputs in;
  in.eta_c = Efficiency(0.1);
  try {
    table_stats(ProtocolKind::single_click_rsp, in);
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("eta_s") != std::string::npos);
  }
}

TEST_CASE("fidelities outside [0,1] clamp with a flag") {
  // Large amplitude drives the linearized fidelity negative.
  const AttemptStats st = table_stats(ProtocolKind::single_click_rsp, rsp_inputs(1.0, 0.01, 0.5));
  CHECK(st.clamped);
  CHECK(st.fidelity == 0.0);
  CHECK(st.outside_validity == false);  // alpha2 = 0.5 is exactly the budget

  const AttemptStats hot = table_stats(ProtocolKind::single_click_rsp, rsp_inputs(0.1, 0.5, 0.8));
  CHECK(hot.outside_validity);
}

TEST_CASE("all outputs stay in [0,1] across the validity range") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 4000; ++i) {
    TableInputs in;
    in.eta_c = Efficiency(uni(gen));
    in.eta_s = Efficiency(std::max(1e-3, uni(gen)));
    in.eta_a = Efficiency(uni(gen));
    in.eta_b = Efficiency(uni(gen));
    in.alpha2 = MeanPhotonNumber(uni(gen) * kAlpha2ValidityMax);
    in.xi2 = BrightState(uni(gen) * kXi2ValidityMax);
    for (ProtocolKind kind :
         {ProtocolKind::single_click_rsp, ProtocolKind::single_click_eg,
          ProtocolKind::double_click_rsp, ProtocolKind::double_single_click_rsp,
          ProtocolKind::measurement_only_rsp}) {
      const AttemptStats st = table_stats(kind, in);
      CHECK(st.p_success >= 0.0);
      CHECK(st.p_success <= 1.0);
      CHECK(st.fidelity >= 0.0);
      CHECK(st.fidelity <= 1.0);
    }
  }
}

TEST_CASE("single click Bell fidelity") {
  CHECK(single_click_bell_fidelity(0.0, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(single_click_bell_fidelity(0.1, 1.0, 0.0) == doctest::Approx(0.9));
  CHECK(single_click_bell_fidelity(0.0, 0.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("teleportation fidelity is affine and order preserving") {
  CHECK(teleport_fidelity(1.0) == doctest::Approx(1.0));
  CHECK(teleport_fidelity(0.25) == doctest::Approx(0.5));
  const double xi2 = 0.12;
  CHECK(teleport_fidelity(1.0 - xi2) == doctest::Approx(1.0 - 2.0 * xi2 / 3.0));
  double prev = -1.0;
  for (double f = 0.0; f <= 1.0; f += 0.05) {
    const double v = teleport_fidelity(f);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("single click probability, exact and high-loss forms") {
  CHECK(single_click_probability(0.5, 0.5) == doctest::Approx(0.125));
  CHECK(single_click_probability(0.3, 0.0) == 0.0);
  const double exact = single_click_probability(0.01, 0.1);
  const double approx = single_click_probability_high_loss(0.01, 0.1);
  CHECK(std::abs(exact - approx) / approx < 0.11);
}

TEST_CASE("exact single click probability symmetries") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double eta = uni(gen), xi2 = uni(gen);
    CHECK(single_click_probability(eta, xi2) ==
          doctest::Approx(single_click_probability(1.0 - eta, xi2)).epsilon(1e-12));
    CHECK(single_click_probability(eta, xi2) ==
          doctest::Approx(single_click_probability(eta, 1.0 - xi2)).epsilon(1e-12));
  }
}
