#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace qmux {

// Error categories; the CLI maps them onto exit codes (config 2, infeasible 3, io 4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct InfeasibleError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

/// Rejects NaN and infinities. Returns the value unchanged.
double require_finite(double v, const std::string& field);

/// Returns p unchanged if 0 <= p <= 1, otherwise throws ConfigError naming `field`.
double validate_probability(double p, const std::string& field = "p");

/// Like validate_probability but for a half-open domain check v >= 0.
double validate_nonnegative(double v, const std::string& field);

/// Channel or detection efficiency, dimensionless in [0, 1].
class Efficiency {
 public:
  Efficiency() = default;
  explicit Efficiency(double value, const std::string& field = "efficiency")
      : value_(validate_probability(value, field)) {}
  double value() const { return value_; }

 private:
  double value_ = 0.0;
};

/// Probability that an emitter is in the bright state (xi^2), in [0, 1].
class BrightState {
 public:
  BrightState() = default;
  explicit BrightState(double xi_squared, const std::string& field = "xi2")
      : xi2_(validate_probability(xi_squared, field)) {}
  double xi2() const { return xi2_; }

 private:
  double xi2_ = 0.0;
};

/// Mean photon number |alpha|^2 of a weak coherent pulse, >= 0.
class MeanPhotonNumber {
 public:
  MeanPhotonNumber() = default;
  explicit MeanPhotonNumber(double alpha_squared, const std::string& field = "alpha2")
      : alpha2_(validate_nonnegative(alpha_squared, field)) {}
  double alpha2() const { return alpha2_; }

 private:
  double alpha2_ = 0.0;
};

/// Per-link timing and loss budget. Idle storage is never worse than active
/// storage, so coherence_idle >= coherence_active is enforced.
struct LinkParams {
  Efficiency eta;
  double attempt_duration = 1.0;   // tau_e, seconds
  double coherence_active = 1.0;   // tau_ce, seconds
  double coherence_idle = 1.0;     // tau_co, seconds

  static LinkParams make(Efficiency eta, double tau_e, double tau_ce, double tau_co);
};

/// One point of a rate-fidelity curve. Rates are per attempt duration tau_e;
/// the CLI divides by tau_e only when absolute rates are requested.
struct RatePoint {
  double rate = 0.0;
  double fidelity = 1.0;
  std::map<std::string, double> params;  // generating parameter values + flags

  static RatePoint make(double rate, double fidelity, std::map<std::string, double> params = {});
};

/// Multiplexed-vs-baseline rate comparison against a stated classical bound.
struct GainReport {
  double rate_multiplexed = 0.0;
  double rate_baseline = 0.0;
  double gain = 1.0;
  double classical_bound = 1.0;

  static GainReport from_rates(double rate_multiplexed, double rate_baseline,
                               double classical_bound);
};

}  // namespace qmux
