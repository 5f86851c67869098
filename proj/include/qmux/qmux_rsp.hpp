#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qmux/core.hpp"

// M-client quantum-multiplexed single-click RSP onto one server. The server
// splits its emission across the M client channels; heralding accepts exactly
// one click over all channels. gamma = eta_c |alpha|^2 is the per-client
// detected pulse energy and the natural sweep parameter.

namespace qmux::rsp {

struct RspConfig {
  int clients = 1;   // M
  Efficiency eta_c;  // client -> station, incl. fiber
  Efficiency eta_s;  // server -> station, per channel
  MeanPhotonNumber alpha2;
  std::optional<BrightState> xi;  // server bright state; optimized when absent
  double attempt_duration = 1.0;

  static RspConfig make(int clients, double eta_c, double eta_s, double alpha2,
                        std::optional<double> xi2 = std::nullopt, double tau_e = 1.0);
  double gamma() const { return eta_c.value() * alpha2.alpha2(); }
};

enum class Demand {
  single_user_all_devices,
  continuous_multi_user,
  single_use_multi_user,
};

/// Security-motivated default cap on the WCP mean photon number.
inline constexpr double kAlpha2Cap = 0.5;

/// Fidelity-maximizing server bright-state probability.
double optimal_xi2(int clients, double eta_c, double eta_s, double alpha2);
double optimal_xi2_gamma(int clients, double eta_s, double gamma);

/// Heralded-state fidelity at an explicit bright-state value (full form).
double fidelity_at_xi2(int clients, double eta_s, double gamma, double xi2);

/// Fidelity maximized over the bright state, closed form. Equals
/// fidelity_at_xi2 evaluated at optimal_xi2_gamma; small-gamma limit
/// 1 - [M(1-eta_s) + eta_s/4] / (4 eta_s) * gamma.
double fidelity_optimized(int clients, double eta_s, double gamma);

/// Probability of exactly one click over all M channels (total rate, tau_e=1).
double rate_total(int clients, double eta_s, double gamma);

/// Per-channel success probability; rate_total = M * rate_per_channel.
double rate_per_channel(int clients, double eta_s, double gamma);

struct RateAtFidelity {
  double rate = 0.0;    // total rate at the chosen gamma
  double gamma = 0.0;
  double fidelity = 1.0;
};

/// Maximum total rate subject to fidelity >= f_min and alpha2 <= alpha2_cap.
RateAtFidelity max_rate_at_fidelity(int clients, double eta_c, double eta_s, double f_min,
                                    double alpha2_cap = kAlpha2Cap);

/// Multiplexing gain for one of the three demand models, baseline M = 1 at
/// the same target fidelity. classical_bound = 1: the single server memory
/// admits no semiclassical multiplexing at all.
GainReport gain(int clients, double eta_c, double eta_s, double f_min, Demand demand,
                double alpha2_cap = kAlpha2Cap);

/// Whole-cohort rate for single-use demand: stage m re-solves (alpha, xi) so
/// each remaining-m configuration holds exactly the target fidelity. Throws
/// InfeasibleError when a stage cannot reach down to the target (the
/// large-drop regime).
double single_use_cohort_rate(int clients, double eta_c, double eta_s, double f_target,
                              double alpha2_cap = kAlpha2Cap);

/// One RatePoint per gamma with the bright state optimized; rates follow the
/// demand model's convention (total, per-user, or cohort).
std::vector<RatePoint> rate_fidelity_sweep(int clients, double eta_c, double eta_s,
                                           std::span<const double> gamma_grid, Demand demand,
                                           double alpha2_cap = kAlpha2Cap);

Demand demand_from_string(const std::string& name);
std::string to_string(Demand demand);

}  // namespace qmux::rsp
