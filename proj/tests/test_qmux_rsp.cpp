#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qmux/qmux_rsp.hpp"

using namespace qmux;
using rsp::Demand;

TEST_CASE("optimal bright state, small-alpha limit M gamma / eta_s") {
  for (int m : {1, 5, 20}) {
    for (double eta_s : {0.1, 0.5, 0.9}) {
      const double gamma = 1e-8;
      const double xi2 = rsp::optimal_xi2_gamma(m, eta_s, gamma);
      CHECK(xi2 / (m * gamma / eta_s) == doctest::Approx(1.0).epsilon(1e-4));
    }
  }
  CHECK(rsp::optimal_xi2(3, 0.5, 0.5, 0.0) == 0.0);
}

TEST_CASE("optimal bright state is stationary for the full fidelity") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  std::uniform_int_distribution<int> m_dist(1, 10);
  auto check_stationary = [](int m, double eta_s, double gamma) {
    const double opt = rsp::optimal_xi2_gamma(m, eta_s, gamma);
    REQUIRE(opt > 1e-6);
    REQUIRE(opt < 1.0 - 1e-6);
    // The peak can be much narrower than opt itself, so the step must be a
    // small fraction of opt for the third-order term not to dominate.
    const double h = 1e-6 * opt;
    const double f0 = rsp::fidelity_at_xi2(m, eta_s, gamma, opt);
    const double up = rsp::fidelity_at_xi2(m, eta_s, gamma, opt + h);
    const double dn = rsp::fidelity_at_xi2(m, eta_s, gamma, opt - h);
    const double slope = (up - dn) / (2.0 * h);
    CHECK(std::abs(slope) < 1e-6);
    // maximum property at coarser steps as well
    for (double rel : {1e-4, 1e-2}) {
      const double x1 = opt * (1.0 + rel);
      const double x2 = opt * (1.0 - rel);
      if (x1 < 1.0) CHECK(rsp::fidelity_at_xi2(m, eta_s, gamma, x1) <= f0 + 1e-12);
      CHECK(rsp::fidelity_at_xi2(m, eta_s, gamma, x2) <= f0 + 1e-12);
    }
  };
  check_stationary(1, 0.1, 1e-3 * 0.5);  // eta_c = 1e-3, alpha2 = 0.5
  for (int i = 0; i < 200; ++i) {
    check_stationary(m_dist(gen), uni(gen), uni(gen) * 0.3 + 1e-3);
  }
}

TEST_CASE("optimized fidelity equals the full form at the optimal bright state") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  std::uniform_int_distribution<int> m_dist(1, 16);
  for (int i = 0; i < 500; ++i) {
    const int m = m_dist(gen);
    const double eta_s = uni(gen);
    const double gamma = uni(gen) * 0.5 + 1e-6;
    const double xi2 = rsp::optimal_xi2_gamma(m, eta_s, gamma);
    const double full = rsp::fidelity_at_xi2(m, eta_s, gamma, xi2);
    const double closed = rsp::fidelity_optimized(m, eta_s, gamma);
    CHECK(closed == doctest::Approx(full).epsilon(1e-10));
  }
}

TEST_CASE("fidelity small-alpha slope") {
  // (1 - F) / gamma -> [M (1-eta_s) + eta_s/4] / (4 eta_s)
  for (int m : {1, 5}) {
    for (double eta_s : {0.1, 0.9}) {
      const double gamma = 1e-5;
      const double f = rsp::fidelity_optimized(m, eta_s, gamma);
      const double slope = (1.0 - f) / gamma;
      const double want = (m * (1.0 - eta_s) + eta_s / 4.0) / (4.0 * eta_s);
      CHECK(slope == doctest::Approx(want).epsilon(0.01));
    }
  }
  CHECK(rsp::fidelity_optimized(5, 0.1, 0.0) == 1.0);
  // the small-alpha form misses only a quadratic remainder
  auto remainder = [](double gamma) {
    const double full = rsp::fidelity_optimized(5, 0.1, gamma);
    const double small = 1.0 - (5 * 0.9 + 0.025) / 0.4 * gamma;
    return std::abs(full - small);
  };
  CHECK(remainder(1e-4) < 1e-5);
  CHECK(remainder(1e-4) < remainder(1e-3) / 50.0);  // ~ gamma^2 scaling
}

TEST_CASE("fidelity stays in (1/2, 1] and rate sanity") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> uni(0.02, 0.98);
  std::uniform_int_distribution<int> m_dist(1, 32);
  for (int i = 0; i < 2000; ++i) {
    const int m = m_dist(gen);
    const double eta_s = uni(gen);
    const double gamma = uni(gen);
    const double f = rsp::fidelity_optimized(m, eta_s, gamma);
    CHECK(f > 0.5);
    CHECK(f <= 1.0 + 1e-12);
    CHECK(rsp::rate_total(m, eta_s, gamma) >= 0.0);
  }
}

TEST_CASE("rate small-alpha law and the per-channel identity") {
  for (int m : {1, 5}) {
    for (double eta_s : {0.1, 0.9}) {
      const double gamma = 1e-5;
      CHECK(rsp::rate_total(m, eta_s, gamma) / (2.0 * m * gamma) ==
            doctest::Approx(1.0).epsilon(0.01));
    }
  }
  CHECK(rsp::rate_total(4, 0.3, 0.0) == 0.0);

  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> uni(0.02, 0.98);
  std::uniform_int_distribution<int> m_dist(1, 24);
  for (int i = 0; i < 1000; ++i) {
    const int m = m_dist(gen);
    const double eta_s = uni(gen), gamma = uni(gen) * 0.6;
    const double total = rsp::rate_total(m, eta_s, gamma);
    const double per = rsp::rate_per_channel(m, eta_s, gamma);
    CHECK(total == doctest::Approx(m * per).epsilon(1e-12));
  }
}

TEST_CASE("fidelity at fixed total power improves with M") {
  // The per-client comparison at equal gamma gets worse with M; the paper's
  // 1/M multi-photon suppression shows up at equal total detected power.
  for (double eta_s : {0.1, 0.5, 0.9}) {
    const double total = 1e-4;
    double prev = 0.0;
    for (int m = 1; m <= 16; m *= 2) {
      const double f = rsp::fidelity_optimized(m, eta_s, total / m);
      CHECK(f >= prev - 1e-12);
      prev = f;
    }
  }
}

TEST_CASE("gain: trivial and limit values") {
  // F_min must sit inside the band reachable under the amplitude cap: the
  // single-use stages solve for the target with equality.
  for (Demand d : {Demand::single_user_all_devices, Demand::continuous_multi_user,
                   Demand::single_use_multi_user}) {
    CHECK(rsp::gain(1, 1e-3, 0.5, 1.0 - 1e-4, d).gain == doctest::Approx(1.0).epsilon(1e-6));
  }

  // All three demand models share the M -> infinity limit 1 + eta_s/(4(1-eta_s)).
  const double want = 1.0 + 0.9 / (4.0 * 0.1);
  for (Demand d : {Demand::single_user_all_devices, Demand::continuous_multi_user,
                   Demand::single_use_multi_user}) {
    const GainReport g = rsp::gain(1000, 1e-3, 0.9, 1.0 - 1e-5, d);
    CHECK(g.gain == doctest::Approx(want).epsilon(0.02));
  }
}

TEST_CASE("single-use gain sits below continuous demand") {
  const double f_min = 1.0 - 1e-4;  // reachable by every stage under the cap
  const GainReport cont = rsp::gain(5, 1e-3, 0.5, f_min, Demand::continuous_multi_user);
  const GainReport once = rsp::gain(5, 1e-3, 0.5, f_min, Demand::single_use_multi_user);
  CHECK(once.gain < cont.gain);
}

TEST_CASE("perfect-server limits") {
  const double eta_s = 1.0 - 1e-6;
  const double f_min = 1.0 - 1e-6;
  const int m = 50;
  const GainReport user = rsp::gain(m, 1e-3, eta_s, f_min, Demand::single_user_all_devices);
  CHECK(user.gain == doctest::Approx(static_cast<double>(m)).epsilon(0.02));

  double harmonic = 0.0;
  for (int k = 1; k <= m; ++k) harmonic += 1.0 / k;
  const GainReport once = rsp::gain(m, 1e-3, eta_s, f_min, Demand::single_use_multi_user);
  CHECK(once.gain == doctest::Approx(m / harmonic).epsilon(0.02));
}

TEST_CASE("sweep shows the multi-client rate maximum in gamma") {
  std::vector<double> grid;
  for (double g = 1e-3; g <= 0.5; g *= 1.3) grid.push_back(g);
  const auto multi = rsp::rate_fidelity_sweep(5, 1.0, 0.5, grid, Demand::single_user_all_devices);
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < multi.size(); ++i) {
    if (multi[i].rate > multi[argmax].rate) argmax = i;
  }
  CHECK(argmax > 0);
  CHECK(argmax < multi.size() - 1);  // interior maximum: rate falls after the critical gamma

  // M = 1 over small gamma is monotone increasing.
  std::vector<double> small;
  for (double g = 1e-5; g <= 0.1; g *= 2.0) small.push_back(g);
  const auto single = rsp::rate_fidelity_sweep(1, 1.0, 0.5, small, Demand::single_user_all_devices);
  for (std::size_t i = 1; i < single.size(); ++i) {
    CHECK(single[i].rate >= single[i - 1].rate);
  }

  // gamma -> 0 endpoint: vanishing rate, perfect fidelity.
  CHECK(single.front().rate < 1e-4);
  CHECK(single.front().fidelity > 1.0 - 1e-4);
}

TEST_CASE("single-use sweep flags the large-drop regime") {
  // Low fidelity targets (large gamma) cannot be matched by the late stages
  // with fewer participating clients; those points are flagged and zeroed.
  std::vector<double> grid;
  for (double g = 1e-4; g <= 0.5; g *= 2.0) grid.push_back(g);
  const auto points = rsp::rate_fidelity_sweep(5, 1.0, 0.5, grid, Demand::single_use_multi_user);
  bool any_drop = false, any_ok = false;
  for (const RatePoint& pt : points) {
    const auto it = pt.params.find("large_drop");
    if (it != pt.params.end() && it->second == 1.0) {
      any_drop = true;
      CHECK(pt.rate == 0.0);
    } else {
      any_ok = true;
    }
  }
  CHECK(any_drop);
  CHECK(any_ok);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(rsp::gain(0, 1e-3, 0.5, 0.9, Demand::single_user_all_devices), ConfigError);
  CHECK_THROWS_AS(rsp::max_rate_at_fidelity(2, 1e-3, 0.5, 0.4), ConfigError);
  std::vector<double> bad{0.0};
  CHECK_THROWS_AS(
      rsp::rate_fidelity_sweep(2, 1e-3, 0.5, bad, Demand::single_user_all_devices),
      ConfigError);
}
