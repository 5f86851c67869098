#include "qmux/core.hpp"

#include <sstream>

namespace qmux {

double require_finite(double v, const std::string& field) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "field '" << field << "': value must be finite, got " << v;
    throw ConfigError(os.str());
  }
  return v;
}

double validate_probability(double p, const std::string& field) {
  require_finite(p, field);
  if (p < 0.0 || p > 1.0) {
    std::ostringstream os;
    os << "field '" << field << "': value " << p << " outside [0, 1]";
    throw ConfigError(os.str());
  }
  return p;
}

double validate_nonnegative(double v, const std::string& field) {
  require_finite(v, field);
  if (v < 0.0) {
    std::ostringstream os;
    os << "field '" << field << "': value " << v << " must be >= 0";
    throw ConfigError(os.str());
  }
  return v;
}

LinkParams LinkParams::make(Efficiency eta, double tau_e, double tau_ce, double tau_co) {
  require_finite(tau_e, "tau_e");
  require_finite(tau_ce, "tau_ce");
  require_finite(tau_co, "tau_co");
  if (tau_e <= 0.0) throw ConfigError("field 'tau_e': attempt duration must be > 0");
  if (tau_ce <= 0.0) throw ConfigError("field 'tau_ce': coherence time must be > 0");
  if (tau_co < tau_ce) {
    throw ConfigError("field 'tau_co': idle coherence time must be >= active coherence time");
  }
  return LinkParams{eta, tau_e, tau_ce, tau_co};
}

RatePoint RatePoint::make(double rate, double fidelity, std::map<std::string, double> params) {
  validate_nonnegative(rate, "rate");
  validate_probability(fidelity, "fidelity");
  return RatePoint{rate, fidelity, std::move(params)};
}

GainReport GainReport::from_rates(double rate_multiplexed, double rate_baseline,
                                  double classical_bound) {
  require_finite(rate_multiplexed, "rate_multiplexed");
  require_finite(rate_baseline, "rate_baseline");
  if (rate_baseline <= 0.0) {
    throw InfeasibleError("gain report requires a positive baseline rate");
  }
  GainReport r;
  r.rate_multiplexed = rate_multiplexed;
  r.rate_baseline = rate_baseline;
  r.gain = rate_multiplexed / rate_baseline;
  r.classical_bound = classical_bound;
  return r;
}

}  // namespace qmux
