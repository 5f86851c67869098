#include "qmux/qmux_rsp.hpp"

#include <cmath>
#include <sstream>

#include "qmux/optim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmux::rsp {

namespace {

// A = 1 - e^{-gamma/2}, the per-channel click amplitude factor.
double click_amp(double gamma) { return -std::expm1(-0.5 * gamma); }

void validate_common(int clients, double eta_s, double gamma) {
  if (clients < 1) throw ConfigError("field 'M': must be >= 1");
  validate_probability(eta_s, "eta_s");
  validate_nonnegative(gamma, "gamma");
}

double stage_gamma_for_target(int m, double eta_s, double f_target, double gamma_cap) {
  const double lo = 1e-300;
  if (fidelity_optimized(m, eta_s, gamma_cap) > f_target) {
    std::ostringstream os;
    os << "single-use stage with " << m
       << " clients cannot reach down to target fidelity " << f_target
       << " within the amplitude cap (large-drop regime)";
    throw InfeasibleError(os.str());
  }
  return optim::bisect_equal([&](double g) { return fidelity_optimized(m, eta_s, g); }, lo,
                             gamma_cap, f_target);
}

}  // namespace

RspConfig RspConfig::make(int clients, double eta_c, double eta_s, double alpha2,
                          std::optional<double> xi2, double tau_e) {
  if (clients < 1) throw ConfigError("field 'M': must be >= 1");
  if (tau_e <= 0.0) throw ConfigError("field 'tau_e': must be > 0");
  RspConfig cfg;
  cfg.clients = clients;
  cfg.eta_c = Efficiency(eta_c, "eta_c");
  cfg.eta_s = Efficiency(eta_s, "eta_s");
  cfg.alpha2 = MeanPhotonNumber(alpha2, "alpha2");
  if (xi2) cfg.xi = BrightState(*xi2, "xi2");
  cfg.attempt_duration = tau_e;
  return cfg;
}

double optimal_xi2(int clients, double eta_c, double eta_s, double alpha2) {
  validate_probability(eta_c, "eta_c");
  validate_nonnegative(alpha2, "alpha2");
  return optimal_xi2_gamma(clients, eta_s, eta_c * alpha2);
}

double optimal_xi2_gamma(int clients, double eta_s, double gamma) {
  validate_common(clients, eta_s, gamma);
  if (gamma == 0.0) return 0.0;
  const double a = click_amp(gamma);
  const double m = static_cast<double>(clients);
  const double den = 2.0 * a + eta_s * ((1.0 + 0.5 * gamma) / (2.0 * m) - a);
  return a / den;
}

double fidelity_at_xi2(int clients, double eta_s, double gamma, double xi2) {
  validate_common(clients, eta_s, gamma);
  validate_probability(xi2, "xi2");
  if (gamma == 0.0 || xi2 == 0.0) return gamma == 0.0 && xi2 == 0.0 ? 1.0 : 0.5;
  const double a = click_amp(gamma);
  const double m = static_cast<double>(clients);
  const double num = std::sqrt(gamma * (eta_s / m) * (1.0 - xi2) * xi2);
  const double den = a * (1.0 - eta_s * xi2) + xi2 * (eta_s / (2.0 * m)) * (1.0 + 0.5 * gamma);
  return 0.5 * (1.0 + num / den);
}

double fidelity_optimized(int clients, double eta_s, double gamma) {
  validate_common(clients, eta_s, gamma);
  if (gamma == 0.0) return 1.0;
  // Closed form of max_xi fidelity_at_xi2: with A = 1 - e^{-gamma/2} the
  // optimum sits at xi^2 = A / (2A + beta), beta = eta_s (1+gamma/2)/(2M)
  // - A eta_s, and the maximized ratio squared is 1 / (4 A (A + beta)).
  const double a = click_amp(gamma);
  const double m = static_cast<double>(clients);
  const double bracket = 4.0 * (1.0 - eta_s) * a + eta_s * (2.0 + gamma) / m;
  const double ratio2 = (eta_s * gamma / m) / (a * bracket);
  return 0.5 * (1.0 + std::sqrt(ratio2));
}

double rate_total(int clients, double eta_s, double gamma) {
  validate_common(clients, eta_s, gamma);
  if (gamma == 0.0) return 0.0;
  const double a = click_amp(gamma);
  const double m = static_cast<double>(clients);
  const double pre = 4.0 * std::exp(-(m - 0.5) * gamma) * a;
  const double num = 4.0 * m * (1.0 - eta_s) * a + eta_s * (2.0 + gamma);
  const double den = 4.0 * (2.0 - eta_s) * a + (eta_s / m) * (2.0 + gamma);
  return pre * num / den;
}

double rate_per_channel(int clients, double eta_s, double gamma) {
  validate_common(clients, eta_s, gamma);
  if (gamma == 0.0) return 0.0;
  const double a = click_amp(gamma);
  const double m = static_cast<double>(clients);
  const double pre = 4.0 * std::exp(-(m - 0.5) * gamma) * a;
  const double num = 4.0 * m * (1.0 - eta_s) * a + eta_s * (2.0 + gamma);
  const double den = 4.0 * m * (2.0 - eta_s) * a + eta_s * (2.0 + gamma);
  return pre * num / den;
}

RateAtFidelity max_rate_at_fidelity(int clients, double eta_c, double eta_s, double f_min,
                                    double alpha2_cap) {
  validate_probability(eta_c, "eta_c");
  validate_probability(f_min, "F_min");
  if (f_min <= 0.5 || f_min >= 1.0) throw ConfigError("field 'F_min': must lie in (1/2, 1)");
  if (alpha2_cap <= 0.0) throw ConfigError("field 'alpha2_cap': must be > 0");
  const double gamma_cap = eta_c * alpha2_cap;
  const double lo = 1e-300;
  auto fid = [&](double g) { return fidelity_optimized(clients, eta_s, g); };
  if (fid(lo) < f_min) {
    throw InfeasibleError("RSP fidelity target unreachable at any pulse amplitude");
  }
  const double gamma_max = optim::bisect_largest_feasible(fid, lo, gamma_cap, f_min, 1e-13);
  auto rate = [&](double g) { return rate_total(clients, eta_s, g); };
  const optim::GoldenResult best = optim::golden_section_max(rate, lo, gamma_max, 1e-13);
  return RateAtFidelity{best.value, best.x, fid(best.x)};
}

double single_use_cohort_rate(int clients, double eta_c, double eta_s, double f_target,
                              double alpha2_cap) {
  validate_probability(eta_c, "eta_c");
  validate_probability(f_target, "F_target");
  const double gamma_cap = eta_c * alpha2_cap;
  double total_time = 0.0;
  for (int m = 1; m <= clients; ++m) {
    const double gamma_m = stage_gamma_for_target(m, eta_s, f_target, gamma_cap);
    const double stage_rate = rate_total(m, eta_s, gamma_m);  // = m * per-channel rate
    if (stage_rate <= 0.0) {
      throw InfeasibleError("single-use stage rate vanished at the target fidelity");
    }
    total_time += 1.0 / stage_rate;
  }
  return 1.0 / total_time;
}

GainReport gain(int clients, double eta_c, double eta_s, double f_min, Demand demand,
                double alpha2_cap) {
  switch (demand) {
    case Demand::single_user_all_devices: {
      const RateAtFidelity multi = max_rate_at_fidelity(clients, eta_c, eta_s, f_min, alpha2_cap);
      const RateAtFidelity base = max_rate_at_fidelity(1, eta_c, eta_s, f_min, alpha2_cap);
      return GainReport::from_rates(multi.rate, base.rate, 1.0);
    }
    case Demand::continuous_multi_user: {
      // Per-user rates: each of the M users sees the per-channel rate, the
      // time-shared baseline gives each user 1/M of the single-client rate.
      const RateAtFidelity multi = max_rate_at_fidelity(clients, eta_c, eta_s, f_min, alpha2_cap);
      const RateAtFidelity base = max_rate_at_fidelity(1, eta_c, eta_s, f_min, alpha2_cap);
      const double m = static_cast<double>(clients);
      return GainReport::from_rates(multi.rate / m, base.rate / m, 1.0);
    }
    case Demand::single_use_multi_user: {
      const double cohort = single_use_cohort_rate(clients, eta_c, eta_s, f_min, alpha2_cap);
      const double gamma_cap = eta_c * alpha2_cap;
      const double gamma_1 = stage_gamma_for_target(1, eta_s, f_min, gamma_cap);
      const double base_cohort =
          rate_total(1, eta_s, gamma_1) / static_cast<double>(clients);
      return GainReport::from_rates(cohort, base_cohort, 1.0);
    }
  }
  throw ConfigError("unknown demand model");
}

std::vector<RatePoint> rate_fidelity_sweep(int clients, double eta_c, double eta_s,
                                           std::span<const double> gamma_grid, Demand demand,
                                           double alpha2_cap) {
  validate_probability(eta_c, "eta_c");
  for (double g : gamma_grid) {
    if (!(g > 0.0)) throw ConfigError("gamma grid values must be > 0");
  }
  std::vector<RatePoint> out(gamma_grid.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(gamma_grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double gamma = gamma_grid[static_cast<std::size_t>(i)];
    const double xi2 = optimal_xi2_gamma(clients, eta_s, gamma);
    const double fid = fidelity_optimized(clients, eta_s, gamma);
    std::map<std::string, double> params{
        {"gamma", gamma},
        {"alpha2", gamma / eta_c},
        {"xi2", xi2},
        {"alpha2_over_cap", gamma / eta_c > alpha2_cap ? 1.0 : 0.0},
    };
    double rate = 0.0;
    switch (demand) {
      case Demand::single_user_all_devices:
        rate = rate_total(clients, eta_s, gamma);
        break;
      case Demand::continuous_multi_user:
        rate = rate_total(clients, eta_s, gamma) / static_cast<double>(clients);
        break;
      case Demand::single_use_multi_user:
        try {
          rate = single_use_cohort_rate(clients, eta_c, eta_s, fid, alpha2_cap);
        } catch (const InfeasibleError&) {
          rate = 0.0;
          params["large_drop"] = 1.0;
        }
        break;
    }
    out[static_cast<std::size_t>(i)] = RatePoint::make(rate, fid, std::move(params));
  }
  return out;
}

Demand demand_from_string(const std::string& name) {
  if (name == "single_user" || name == "single_user_all_devices") {
    return Demand::single_user_all_devices;
  }
  if (name == "continuous" || name == "continuous_multi_user") {
    return Demand::continuous_multi_user;
  }
  if (name == "single_use" || name == "single_use_multi_user") {
    return Demand::single_use_multi_user;
  }
  throw ConfigError("unknown demand model '" + name + "'");
}

std::string to_string(Demand demand) {
  switch (demand) {
    case Demand::single_user_all_devices: return "single_user";
    case Demand::continuous_multi_user: return "continuous";
    case Demand::single_use_multi_user: return "single_use";
  }
  return "unknown";
}

}  // namespace qmux::rsp
