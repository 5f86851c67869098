#pragma once

#include <optional>

#include "qmux/core.hpp"

// M-to-1 quantum-multiplexed heralded entanglement generation: node A holds M
// memories whose emissions share one fiber, node B holds a single memory whose
// photon is split across the M temporal modes. Heralding on exactly one click
// leaves one A memory entangled with B.

namespace qmux::eg {

struct EgConfig {
  int memories = 1;  // M, memories at node A
  Efficiency eta_a;  // channel A -> heralding station
  Efficiency eta_b;  // channel B -> heralding station
  BrightState xi_a;  // emission probability per A memory
  std::optional<BrightState> xi_b;  // B emission probability; optimized when absent
  double attempt_duration = 1.0;    // tau_e

  static EgConfig make(int memories, double eta_a, double eta_b, double xi_a2,
                       std::optional<double> xi_b2 = std::nullopt, double tau_e = 1.0);
};

/// Fidelity-maximizing bright-state probability at B for a given xi_A^2:
/// eta_A xi_A^2 / (eta_B/M + (eta_A - eta_B/M) xi_A^2). Always <= 1. This
/// closed form is the leading-order maximizer; it coincides with the true
/// argmax as xi_A^2 -> 0 and is exact in the lossless symmetric case.
double optimal_xi_b2(int memories, double eta_a, double eta_b, double xi_a2);

/// Numerical argmax of the fidelity over xi_B^2, for cross-checks.
double optimal_xi_b2_numeric(int memories, double eta_a, double eta_b, double xi_a2);

/// Flag threshold: the optimum pushing against xi_B^2 = 1 signals the
/// high-efficiency regime where multiplexing stops paying.
inline constexpr double kBrightSaturation = 0.99;

/// Heralded-state fidelity to the Bell state, with xi_B optimized when absent.
double fidelity(const EgConfig& cfg);

/// Probability of exactly one click across the 2M detection modes.
double click_probability(const EgConfig& cfg);

/// (rate, fidelity) at the configured xi_A^2, rate in units of 1/tau_e.
RatePoint rate_point(const EgConfig& cfg);

/// Maximum rate subject to fidelity >= f_min: bisection finds the largest
/// feasible xi_A^2, golden-section search then guards against non-monotone
/// rate corners at high efficiency.
RatePoint rate_at_fidelity(int memories, double eta_a, double eta_b, double f_min);

/// Multiplexing gain vs the M = 1 protocol at equal target fidelity. Any
/// gain >= 1 beats the classical bound (no classical multiplexing exists for
/// one shared memory at B), so classical_bound = 1.
GainReport gain(int memories, double eta_a, double eta_b, double f_min);

}  // namespace qmux::eg
