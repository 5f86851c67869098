#pragma once

#include <optional>
#include <string>

#include "qmux/core.hpp"

// Per-attempt success probabilities and fidelities of the elementary RSP/EG
// protocols. The closed forms are leading order in the pulse amplitude and
// bright-state probability and assume high loss; outside the declared
// validity budget results carry a warning flag, and fidelities that leave
// [0, 1] are clamped with an explicit flag rather than silently.

namespace qmux::protocols {

enum class ProtocolKind {
  single_click_rsp,
  single_click_eg,
  double_click_rsp,
  double_single_click_rsp,
  measurement_only_rsp,
};

inline constexpr double kAlpha2ValidityMax = 0.5;
inline constexpr double kXi2ValidityMax = 0.2;

struct TableInputs {
  std::optional<Efficiency> eta_c;       // client channel
  std::optional<Efficiency> eta_s;       // server channel
  std::optional<Efficiency> eta_a;       // left node channel
  std::optional<Efficiency> eta_b;       // right node channel
  std::optional<MeanPhotonNumber> alpha2;
  std::optional<BrightState> xi2;
};

struct AttemptStats {
  double p_success = 0.0;
  double fidelity = 1.0;
  bool clamped = false;           // formula left [0, 1] and was clamped
  bool outside_validity = false;  // inputs beyond the leading-order budget
};

/// Closed-form (P, F) for one protocol row. Throws ConfigError naming any
/// field the chosen protocol needs but was not given.
AttemptStats table_stats(ProtocolKind kind, const TableInputs& in);

/// Bell-state fidelity of single-click EG: (1/2)(1-xi^2)(1+sqrt(V))(1-p_ph).
double single_click_bell_fidelity(double xi2, double visibility, double p_dephasing);

/// Teleported-state fidelity through a Bell pair of fidelity f_sc: (2 f + 1)/3.
double teleport_fidelity(double f_sc);

/// Exact single-click EG success probability 2 eta (1-eta)(1-xi^2) xi^2.
double single_click_probability(double eta, double xi2);

/// High-loss approximation 2 eta xi^2.
double single_click_probability_high_loss(double eta, double xi2);

std::string to_string(ProtocolKind kind);
ProtocolKind protocol_kind_from_string(const std::string& name);

}  // namespace qmux::protocols
