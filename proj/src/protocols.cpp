#include "qmux/protocols.hpp"

#include <cmath>

namespace qmux::protocols {

namespace {

double require(const std::optional<Efficiency>& v, const char* field, ProtocolKind kind) {
  if (!v) {
    throw ConfigError("protocol '" + to_string(kind) + "' requires field '" + field + "'");
  }
  return v->value();
}

double require(const std::optional<MeanPhotonNumber>& v, const char* field, ProtocolKind kind) {
  if (!v) {
    throw ConfigError("protocol '" + to_string(kind) + "' requires field '" + field + "'");
  }
  return v->alpha2();
}

double require(const std::optional<BrightState>& v, const char* field, ProtocolKind kind) {
  if (!v) {
    throw ConfigError("protocol '" + to_string(kind) + "' requires field '" + field + "'");
  }
  return v->xi2();
}

AttemptStats finalize(double p, double f, bool outside_validity) {
  AttemptStats out;
  out.outside_validity = outside_validity;
  out.p_success = p;
  out.fidelity = f;
  if (out.p_success < 0.0) {
    out.p_success = 0.0;
    out.clamped = true;
  } else if (out.p_success > 1.0) {
    out.p_success = 1.0;
    out.clamped = true;
  }
  if (out.fidelity < 0.0) {
    out.fidelity = 0.0;
    out.clamped = true;
  } else if (out.fidelity > 1.0) {
    out.fidelity = 1.0;
    out.clamped = true;
  }
  return out;
}

}  // namespace

AttemptStats table_stats(ProtocolKind kind, const TableInputs& in) {
  switch (kind) {
    case ProtocolKind::single_click_rsp: {
      const double eta_c = require(in.eta_c, "eta_c", kind);
      const double eta_s = require(in.eta_s, "eta_s", kind);
      const double a2 = require(in.alpha2, "alpha2", kind);
      if (eta_s <= 0.0) throw ConfigError("protocol 'single_click_rsp' requires eta_s > 0");
      const double p = 2.0 * eta_c * a2;
      const double f = 1.0 - eta_c * (4.0 - 3.0 * eta_s) / (16.0 * eta_s) * a2;
      return finalize(p, f, a2 > kAlpha2ValidityMax);
    }
    case ProtocolKind::single_click_eg: {
      const double eta_a = require(in.eta_a, "eta_a", kind);
      const double eta_b = require(in.eta_b, "eta_b", kind);
      const double xi2 = require(in.xi2, "xi2", kind);
      const double p = 2.0 * eta_a * eta_b * xi2;
      const double f = 1.0 - xi2;
      return finalize(p, f, xi2 > kXi2ValidityMax);
    }
    case ProtocolKind::double_click_rsp: {
      const double eta_c = require(in.eta_c, "eta_c", kind);
      const double eta_s = require(in.eta_s, "eta_s", kind);
      const double a2 = require(in.alpha2, "alpha2", kind);
      if (eta_s <= 0.0) throw ConfigError("protocol 'double_click_rsp' requires eta_s > 0");
      const double p = eta_c * eta_s * a2 / 2.0;
      const double f = 1.0 - (eta_c / eta_s) * (4.0 - 3.0 * eta_s) / 16.0 * a2;
      return finalize(p, f, a2 > kAlpha2ValidityMax);
    }
    case ProtocolKind::double_single_click_rsp: {
      const double eta_c = require(in.eta_c, "eta_c", kind);
      const double eta_s = require(in.eta_s, "eta_s", kind);
      const double a2 = require(in.alpha2, "alpha2", kind);
      if (eta_s <= 0.0) {
        throw ConfigError("protocol 'double_single_click_rsp' requires eta_s > 0");
      }
      const double p = (4.0 / 3.0) * eta_c * a2;
      const double f = 1.0 - (eta_c / eta_s) * (4.0 - 3.0 * eta_s) / 8.0 * a2;
      return finalize(p, f, a2 > kAlpha2ValidityMax);
    }
    case ProtocolKind::measurement_only_rsp: {
      const double eta_c = require(in.eta_c, "eta_c", kind);
      const double eta_s = require(in.eta_s, "eta_s", kind);
      return finalize(eta_s * eta_c, 1.0, false);
    }
  }
  throw ConfigError("unknown protocol kind");
}

double single_click_bell_fidelity(double xi2, double visibility, double p_dephasing) {
  validate_probability(xi2, "xi2");
  validate_probability(visibility, "visibility");
  validate_probability(p_dephasing, "p_dephasing");
  return 0.5 * (1.0 - xi2) * (1.0 + std::sqrt(visibility)) * (1.0 - p_dephasing);
}

double teleport_fidelity(double f_sc) {
  validate_probability(f_sc, "F_SC");
  return (2.0 * f_sc + 1.0) / 3.0;
}

double single_click_probability(double eta, double xi2) {
  validate_probability(eta, "eta");
  validate_probability(xi2, "xi2");
  return 2.0 * eta * (1.0 - eta) * (1.0 - xi2) * xi2;
}

double single_click_probability_high_loss(double eta, double xi2) {
  validate_probability(eta, "eta");
  validate_probability(xi2, "xi2");
  return 2.0 * eta * xi2;
}

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::single_click_rsp: return "single_click_rsp";
    case ProtocolKind::single_click_eg: return "single_click_eg";
    case ProtocolKind::double_click_rsp: return "double_click_rsp";
    case ProtocolKind::double_single_click_rsp: return "double_single_click_rsp";
    case ProtocolKind::measurement_only_rsp: return "measurement_only_rsp";
  }
  return "unknown";
}

ProtocolKind protocol_kind_from_string(const std::string& name) {
  if (name == "single_click_rsp") return ProtocolKind::single_click_rsp;
  if (name == "single_click_eg") return ProtocolKind::single_click_eg;
  if (name == "double_click_rsp") return ProtocolKind::double_click_rsp;
  if (name == "double_single_click_rsp") return ProtocolKind::double_single_click_rsp;
  if (name == "measurement_only_rsp") return ProtocolKind::measurement_only_rsp;
  throw ConfigError("unknown protocol kind '" + name + "'");
}

}  // namespace qmux::protocols
