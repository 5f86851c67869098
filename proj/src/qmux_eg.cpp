#include "qmux/qmux_eg.hpp"

#include <cmath>

#include "qmux/optim.hpp"

namespace qmux::eg {

namespace {

double fidelity_raw(int m, double eta_a, double eta_b, double xi_a2, double xi_b2) {
  const double M = static_cast<double>(m);
  const double num_amp = std::sqrt(xi_b2 * eta_b * (1.0 - xi_a2)) +
                         std::sqrt(xi_a2 * M * eta_a * (1.0 - xi_b2));
  const double den = xi_b2 * eta_b * (1.0 - eta_a * xi_a2) +
                     xi_a2 * M * eta_a * (1.0 - eta_b * xi_b2);
  if (den == 0.0) {
    throw ConfigError("EG fidelity undefined: both emission terms vanish");
  }
  return 0.5 * num_amp * num_amp / den;
}

double resolve_xi_b2(const EgConfig& cfg) {
  if (cfg.xi_b) return cfg.xi_b->xi2();
  return optimal_xi_b2(cfg.memories, cfg.eta_a.value(), cfg.eta_b.value(), cfg.xi_a.xi2());
}

}  // namespace

EgConfig EgConfig::make(int memories, double eta_a, double eta_b, double xi_a2,
                        std::optional<double> xi_b2, double tau_e) {
  if (memories < 1) throw ConfigError("field 'M': must be >= 1");
  if (tau_e <= 0.0) throw ConfigError("field 'tau_e': must be > 0");
  EgConfig cfg;
  cfg.memories = memories;
  cfg.eta_a = Efficiency(eta_a, "eta_a");
  cfg.eta_b = Efficiency(eta_b, "eta_b");
  cfg.xi_a = BrightState(xi_a2, "xi_a2");
  if (xi_b2) cfg.xi_b = BrightState(*xi_b2, "xi_b2");
  cfg.attempt_duration = tau_e;
  return cfg;
}

double optimal_xi_b2(int memories, double eta_a, double eta_b, double xi_a2) {
  if (memories < 1) throw ConfigError("field 'M': must be >= 1");
  validate_probability(eta_a, "eta_a");
  validate_probability(eta_b, "eta_b");
  validate_probability(xi_a2, "xi_a2");
  const double M = static_cast<double>(memories);
  const double den = eta_b / M + (eta_a - eta_b / M) * xi_a2;
  if (den == 0.0) {
    throw ConfigError("optimal xi_B^2 degenerate: eta_B and eta_A*xi_A^2 both vanish");
  }
  return eta_a * xi_a2 / den;
}

double optimal_xi_b2_numeric(int memories, double eta_a, double eta_b, double xi_a2) {
  validate_probability(xi_a2, "xi_a2");
  if (xi_a2 == 0.0) return 0.0;
  auto fid = [&](double x) {
    return fidelity_raw(memories, eta_a, eta_b, xi_a2, x);
  };
  return optim::golden_section_max(fid, 1e-12, 1.0 - 1e-12, 1e-13).x;
}

double fidelity(const EgConfig& cfg) {
  return fidelity_raw(cfg.memories, cfg.eta_a.value(), cfg.eta_b.value(), cfg.xi_a.xi2(),
                      resolve_xi_b2(cfg));
}

double click_probability(const EgConfig& cfg) {
  const double M = static_cast<double>(cfg.memories);
  const double ea = cfg.eta_a.value() * cfg.xi_a.xi2();
  const double eb = cfg.eta_b.value() * resolve_xi_b2(cfg);
  const double miss = std::pow(1.0 - ea, M - 1.0);
  return M * ea * miss * (1.0 - eb) + eb * miss * (1.0 - ea);
}

RatePoint rate_point(const EgConfig& cfg) {
  const double xi_b2 = resolve_xi_b2(cfg);
  EgConfig resolved = cfg;
  resolved.xi_b = BrightState(xi_b2, "xi_b2");
  std::map<std::string, double> params{
      {"M", static_cast<double>(cfg.memories)},
      {"eta_a", cfg.eta_a.value()},
      {"eta_b", cfg.eta_b.value()},
      {"xi_a2", cfg.xi_a.xi2()},
      {"xi_b2", xi_b2},
      {"bright_saturation", xi_b2 > kBrightSaturation ? 1.0 : 0.0},
  };
  return RatePoint::make(click_probability(resolved), fidelity(resolved), std::move(params));
}

RatePoint rate_at_fidelity(int memories, double eta_a, double eta_b, double f_min) {
  validate_probability(f_min, "F_min");
  if (f_min <= 0.5 || f_min >= 1.0) {
    throw ConfigError("field 'F_min': must lie in (1/2, 1)");
  }
  const double lo = 1e-12;
  const double hi = 1.0 - 1e-12;
  auto fid = [&](double xi_a2) {
    return fidelity_raw(memories, eta_a, eta_b, xi_a2,
                        optimal_xi_b2(memories, eta_a, eta_b, xi_a2));
  };
  if (fid(lo) < f_min) {
    throw InfeasibleError("no bright-state value reaches the requested EG fidelity");
  }
  const double xi_max = optim::bisect_largest_feasible(fid, lo, hi, f_min, 1e-10);
  auto rate_of = [&](double xi_a2) {
    EgConfig cfg = EgConfig::make(memories, eta_a, eta_b, xi_a2);
    return click_probability(cfg);
  };
  const optim::GoldenResult best = optim::golden_section_max(rate_of, lo, xi_max, 1e-10);
  EgConfig cfg = EgConfig::make(memories, eta_a, eta_b, best.x);
  RatePoint pt = rate_point(cfg);
  pt.params["f_min"] = f_min;
  pt.params["interior_max"] = (best.x < xi_max * (1.0 - 1e-6)) ? 1.0 : 0.0;
  return pt;
}

GainReport gain(int memories, double eta_a, double eta_b, double f_min) {
  const RatePoint multiplexed = rate_at_fidelity(memories, eta_a, eta_b, f_min);
  const RatePoint baseline = rate_at_fidelity(1, eta_a, eta_b, f_min);
  return GainReport::from_rates(multiplexed.rate, baseline.rate, 1.0);
}

}  // namespace qmux::eg
