#include "qmux/multiserver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qmux/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmux::hub {

namespace {

constexpr int kMaxServers = 4096;

// log-space (1-p)^n; flags underflow of the positive exponent case.
double pow_one_minus(double p, double n, bool* underflow) {
  if (p >= 1.0) return 0.0;
  const double log_val = n * std::log1p(-p);
  if (log_val < std::log(std::numeric_limits<double>::min()) && underflow) {
    *underflow = true;
  }
  return std::exp(log_val);
}

struct Sums {
  std::uint64_t n_success = 0;
  std::uint64_t sum_t = 0;
  std::uint64_t sum_st = 0;
  unsigned __int128 sum_t2 = 0;

  void absorb(const Sums& other) {
    n_success += other.n_success;
    sum_t += other.sum_t;
    sum_st += other.sum_st;
    sum_t2 += other.sum_t2;
  }
};

struct RoundOutcome {
  bool success = false;
  std::uint64_t duration = 0;
};

struct RoundDetail {
  std::uint64_t first = 0;
  std::uint64_t spread = 0;
  std::vector<std::uint64_t> completions;  // sorted r'_1..r'_s
  std::vector<std::uint64_t> eg;           // raw EG draws n_2..n_s
};

// One multiplex-strategy round. RSP completions for all M servers are drawn
// up front, the s earliest form the round; EG transfers toward the first
// server run in parallel starting at the first completion. Failed stages
// abort at their cutoff, so the recorded duration is the truncated wall time.
RoundOutcome multiplex_round(const HubConfig& hub, rng::Stream& stream,
                             std::vector<std::uint64_t>& scratch, RoundDetail* detail) {
  const int m = hub.servers;
  const int s = hub.qubits;
  scratch.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) scratch[static_cast<std::size_t>(i)] =
      rng::geometric(stream, hub.p_server_client);
  std::uint64_t eg_ok_all = 1;
  std::uint64_t eg_trunc_max = 0;
  if (detail) detail->eg.clear();
  for (int j = 1; j < s; ++j) {
    const std::uint64_t draw = rng::geometric(stream, hub.p_server_server);
    const std::uint64_t cutoff = static_cast<std::uint64_t>(hub.cutoff_active);
    if (draw > cutoff) eg_ok_all = 0;
    eg_trunc_max = std::max(eg_trunc_max, std::min(draw, cutoff));
    if (detail) detail->eg.push_back(draw);
  }
  std::sort(scratch.begin(), scratch.end());
  const std::uint64_t first = scratch[0];
  const std::uint64_t spread = scratch[static_cast<std::size_t>(s - 1)] - first;
  const bool spread_ok = spread <= static_cast<std::uint64_t>(hub.cutoff_idle);
  RoundOutcome out;
  out.success = spread_ok && eg_ok_all != 0;
  out.duration = first + (spread_ok ? std::max(spread, eg_trunc_max)
                                    : static_cast<std::uint64_t>(hub.cutoff_idle));
  if (detail) {
    detail->first = first;
    detail->spread = spread;
    detail->completions.assign(scratch.begin(), scratch.begin() + s);
  }
  return out;
}

// Try-and-commit: commit to the first RSP success, prepare the remaining
// qubits sequentially on that server under the active cutoff.
RoundOutcome commit_round(const HubConfig& hub, rng::Stream& stream,
                          std::vector<std::uint64_t>& scratch, std::uint64_t window,
                          RoundDetail* detail) {
  const int m = hub.servers;
  const int s = hub.qubits;
  scratch.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) scratch[static_cast<std::size_t>(i)] =
      rng::geometric(stream, hub.p_server_client);
  std::uint64_t first = scratch[0];
  for (int i = 1; i < m; ++i) first = std::min(first, scratch[static_cast<std::size_t>(i)]);
  if (detail) {
    detail->completions.assign(1, first);
    detail->eg.clear();
  }
  std::uint64_t tail = 0;
  for (int i = 1; i < s; ++i) {
    tail += rng::geometric(stream, hub.p_server_client);
    if (detail) detail->completions.push_back(first + tail);
  }
  RoundOutcome out;
  out.success = tail <= window;
  out.duration = first + std::min(tail, window);
  if (detail) {
    detail->first = first;
    detail->spread = tail;
  }
  return out;
}

// Exposure model for accepted rounds: the first qubit idles for the whole
// spread and its server then hosts the consolidation EGs; each transferred
// qubit idles until the last RSP lands and pays its own EG actively,
// composed with the Bell-pair fidelity of the transfer.
double round_fidelity_multiplex(const HubConfig& hub, const RoundDetail& d) {
  const double c_rsp = 2.0 * hub.f0_rsp - 1.0;
  const double c_tel = c_rsp * (2.0 * hub.f0_eg - 1.0);
  const double per_active = hub.tau_e / hub.tau_ce;
  const double per_idle = hub.tau_e / hub.tau_co;
  std::uint64_t eg_max = 0;
  for (std::uint64_t n : d.eg) eg_max = std::max(eg_max, n);
  const std::uint64_t last = d.completions.back();
  double fid = 0.5 * (1.0 + c_rsp * std::exp(-static_cast<double>(d.spread) * per_idle -
                                             static_cast<double>(eg_max) * per_active));
  for (std::size_t j = 0; j < d.eg.size(); ++j) {
    const double wait = static_cast<double>(last - d.completions[j + 1]);
    fid *= 0.5 * (1.0 + c_tel * std::exp(-wait * per_idle -
                                         static_cast<double>(d.eg[j]) * per_active));
  }
  return fid;
}

// Baseline/commit exposure: qubit k sits in active storage while the later
// RSPs run on the same server; the last qubit is delivered immediately.
double round_fidelity_commit(const HubConfig& hub, const RoundDetail& d) {
  const double c_rsp = 2.0 * hub.f0_rsp - 1.0;
  const double per_active = hub.tau_e / hub.tau_ce;
  double fid = 1.0;
  for (std::size_t k = 0; k < d.completions.size(); ++k) {
    const double exposure =
        static_cast<double>(d.completions.back() - d.completions[k]);
    fid *= 0.5 * (1.0 + c_rsp * std::exp(-exposure * per_active));
  }
  return fid;
}

SamplerResult finish(const SamplerConfig& cfg, const Sums& sums, double fstar) {
  SamplerResult res;
  res.worst_case_fidelity = fstar;
  res.n_rounds = static_cast<std::uint64_t>(cfg.rounds);
  res.n_success = sums.n_success;
  const double n = static_cast<double>(cfg.rounds);
  const double mean_s = static_cast<double>(sums.n_success) / n;
  const double mean_t = static_cast<double>(sums.sum_t) / n;
  res.p_succ = mean_s;
  res.mean_attempts = mean_t;
  res.rate = sums.sum_t > 0
                 ? static_cast<double>(sums.n_success) / static_cast<double>(sums.sum_t)
                 : 0.0;
  const double var_s = mean_s - mean_s * mean_s;
  const double mean_t2 = static_cast<double>(sums.sum_t2) / n;
  const double var_t = mean_t2 - mean_t * mean_t;
  const double cov = static_cast<double>(sums.sum_st) / n - mean_s * mean_t;
  const double r = res.rate;
  double var_r = (var_s - 2.0 * r * cov + r * r * var_t) / (n * mean_t * mean_t);
  if (!(var_r > 0.0)) var_r = 0.0;
  res.stderr_rate = std::sqrt(var_r);
  return res;
}

double gate_fstar(const HubConfig& hub, Strategy strategy) {
  if (strategy == Strategy::multiplex) return worst_case_fidelity(hub);
  // try-and-commit never idles: the committed server works under n_e only.
  HubConfig h = hub;
  h.cutoff_idle = h.cutoff_active;
  return worst_case_fidelity_baseline(h);
}

SamplerResult gated_result(const SamplerConfig& cfg, double fstar) {
  SamplerResult res;
  res.worst_case_fidelity = fstar;
  res.gated = true;
  (void)cfg;
  return res;
}

template <typename RoundFn>
SamplerResult sample_parallel(const SamplerConfig& cfg, double fstar, RoundFn round_fn) {
  Sums total;
  const std::int64_t n = cfg.rounds;
#ifdef _OPENMP
#pragma omp parallel
  {
    Sums local;
    std::vector<std::uint64_t> scratch;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(i));
      const RoundOutcome out = round_fn(stream, scratch);
      local.n_success += out.success ? 1u : 0u;
      local.sum_t += out.duration;
      local.sum_st += out.success ? out.duration : 0u;
      local.sum_t2 += static_cast<unsigned __int128>(out.duration) * out.duration;
    }
#pragma omp critical
    total.absorb(local);
  }
#else
  std::vector<std::uint64_t> scratch;
  for (std::int64_t i = 0; i < n; ++i) {
    rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(i));
    const RoundOutcome out = round_fn(stream, scratch);
    total.n_success += out.success ? 1u : 0u;
    total.sum_t += out.duration;
    total.sum_st += out.success ? out.duration : 0u;
    total.sum_t2 += static_cast<unsigned __int128>(out.duration) * out.duration;
  }
#endif
  return finish(cfg, total, fstar);
}

template <typename RoundFn>
SamplerResult sample_serial(const SamplerConfig& cfg, double fstar, RoundFn round_fn) {
  Sums total;
  std::vector<std::uint64_t> scratch;
  for (std::int64_t i = 0; i < cfg.rounds; ++i) {
    rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(i));
    const RoundOutcome out = round_fn(stream, scratch);
    total.n_success += out.success ? 1u : 0u;
    total.sum_t += out.duration;
    total.sum_st += out.success ? out.duration : 0u;
    total.sum_t2 += static_cast<unsigned __int128>(out.duration) * out.duration;
  }
  return finish(cfg, total, fstar);
}

void validate_sampler_config(const SamplerConfig& cfg, Strategy strategy) {
  cfg.hub.validate();
  if (cfg.rounds < 1) throw ConfigError("field 'N': sampler needs at least one round");
  if (strategy == Strategy::multiplex && cfg.hub.qubits > cfg.hub.servers) {
    throw ConfigError(
        "multiplex sampler requires s <= M: it prepares the s earliest of M RSP completions");
  }
}

}  // namespace

void HubConfig::validate() const {
  if (servers < 1 || servers > kMaxServers) {
    throw ConfigError("field 'M': servers must be in [1, 4096]");
  }
  if (qubits < 1) throw ConfigError("field 's': must be >= 1");
  validate_probability(p_server_client, "P_sc");
  validate_probability(p_server_server, "P_ss");
  if (p_server_client <= 0.0) throw ConfigError("field 'P_sc': must be in (0, 1]");
  if (qubits > 1 && p_server_server <= 0.0) {
    throw ConfigError("field 'P_ss': must be in (0, 1] when s > 1");
  }
  if (cutoff_active < 0 || cutoff_idle < 0) {
    throw ConfigError("cutoffs n_e, n_o must be >= 0");
  }
  if (tau_e <= 0.0 || tau_ce <= 0.0) throw ConfigError("tau_e and tau_ce must be > 0");
  if (tau_co < tau_ce) {
    throw ConfigError("field 'tau_co': idle coherence must be >= active coherence");
  }
  validate_probability(f0_rsp, "F0_sc");
  validate_probability(f0_eg, "F0_ss");
}

GainReport single_qubit_hub_gain(double p, int servers) {
  validate_probability(p, "p");
  if (p <= 0.0) throw ConfigError("field 'p': must be in (0, 1]");
  if (servers < 1) throw ConfigError("field 'M': must be >= 1");
  const double m = static_cast<double>(servers);
  const double gain = m * std::pow(1.0 - p, m - 1.0);
  return GainReport::from_rates(gain * p, p, m);
}

AnalyticRate analytic_rate_s2(const HubConfig& hub, Strategy strategy) {
  hub.validate();
  if (hub.qubits != 2) {
    throw ConfigError("analytic rates cover s = 2 only");
  }
  const double p = hub.p_server_client;
  const double m = static_cast<double>(hub.servers);
  const double ne = static_cast<double>(hub.cutoff_active);
  const double no = static_cast<double>(hub.cutoff_idle);
  AnalyticRate out;
  if (strategy == Strategy::try_and_commit || hub.servers == 1) {
    const double a = pow_one_minus(p, ne, &out.underflow);
    const double num = 1.0 - a;
    const double den = 1.0 / (m * p) +
                       ((1.0 - p) / p) * (1.0 - a - ne * p * a) + a * ne;
    out.rate = num / den;
    return out;
  }
  const double k = (m - 1.0) * no;
  const double b = pow_one_minus(p, k, &out.underflow);
  const double pss = hub.p_server_server;
  const double c = pow_one_minus(pss, ne, &out.underflow);
  const double num = (1.0 - b) * (1.0 - c);
  const double den =
      1.0 / (m * p) +
      ((1.0 - p) / p) * (1.0 - b - k * p * b) / (m - 1.0) + b * no +
      (1.0 - b) * (((1.0 - pss) / pss) * (1.0 - c - ne * pss * c) + c * ne);
  out.rate = num / den;
  return out;
}

GainS2 analytic_gain_s2(const HubConfig& hub, Strategy strategy) {
  const AnalyticRate multi = analytic_rate_s2(hub, strategy);
  HubConfig base = hub;
  base.servers = 1;
  const AnalyticRate single = analytic_rate_s2(base, Strategy::try_and_commit);
  GainS2 out;
  const double m = static_cast<double>(hub.servers);
  out.report = GainReport::from_rates(multi.rate, single.rate, m * m);
  out.asymptotic_bound =
      strategy == Strategy::try_and_commit
          ? m
          : m * (m - 1.0) * static_cast<double>(hub.cutoff_idle);
  return out;
}

double storage_fidelity(std::span<const Exposure> exposures, const HubConfig& hub) {
  double fid = 1.0;
  for (const Exposure& e : exposures) {
    validate_nonnegative(e.active_attempts, "t_e");
    validate_nonnegative(e.idle_attempts, "t_o");
    const double decay = e.active_attempts * hub.tau_e / hub.tau_ce +
                         e.idle_attempts * hub.tau_e / hub.tau_co;
    fid *= 0.5 * (1.0 + std::exp(-decay));
  }
  return fid;
}

double expected_exposure_factor(double p, long n_cut, double tau_e, double tau) {
  validate_probability(p, "P");
  if (p <= 0.0) throw ConfigError("field 'P': must be in (0, 1]");
  if (n_cut < 1) throw ConfigError("field 'n_cut': must be >= 1");
  if (tau_e <= 0.0 || tau <= 0.0) throw ConfigError("times must be > 0");
  const double x = std::exp(-tau_e / tau);
  const double q = 1.0 - p;
  // sum_{n=1..N} q^{n-1} p x^n / (1 - q^N), geometric series in qx.
  const double n = static_cast<double>(n_cut);
  const double qx = q * x;
  double series;
  if (qx == 1.0) {
    series = p * x * n;
  } else {
    series = p * x * (1.0 - std::pow(qx, n)) / (1.0 - qx);
  }
  const double norm = -std::expm1(n * std::log1p(-p));
  return series / norm;
}

double worst_case_fidelity(const HubConfig& hub) {
  hub.validate();
  if (hub.qubits == 1) return hub.f0_rsp;
  const double decay_full = std::exp(-static_cast<double>(hub.cutoff_idle) * hub.tau_e / hub.tau_co -
                                     static_cast<double>(hub.cutoff_active) * hub.tau_e / hub.tau_ce);
  const double decay_eg = std::exp(-static_cast<double>(hub.cutoff_active) * hub.tau_e / hub.tau_ce);
  const double c_rsp = 2.0 * hub.f0_rsp - 1.0;
  const double c_tel = c_rsp * (2.0 * hub.f0_eg - 1.0);
  const double f_first = 0.5 * (1.0 + c_rsp * decay_full);
  const double f_mid = 0.5 * (1.0 + c_tel * decay_full);
  const double f_last = 0.5 * (1.0 + c_tel * decay_eg);
  return f_first * std::pow(f_mid, static_cast<double>(hub.qubits - 2)) * f_last;
}

double worst_case_fidelity_baseline(const HubConfig& hub) {
  hub.validate();
  if (hub.qubits == 1) return hub.f0_rsp;
  const double window =
      static_cast<double>(std::min(hub.cutoff_idle, hub.cutoff_active));
  const double decay = std::exp(-window * hub.tau_e / hub.tau_ce);
  const double c_rsp = 2.0 * hub.f0_rsp - 1.0;
  const double f_stored = 0.5 * (1.0 + c_rsp * decay);
  return std::pow(f_stored, static_cast<double>(hub.qubits - 1)) * hub.f0_rsp;
}

SamplerResult run_sampler(const SamplerConfig& cfg, Strategy strategy) {
  validate_sampler_config(cfg, strategy);
  const double fstar = gate_fstar(cfg.hub, strategy);
  if (fstar < cfg.f_min) return gated_result(cfg, fstar);
  if (strategy == Strategy::multiplex) {
    return sample_parallel(cfg, fstar, [&](rng::Stream& s, std::vector<std::uint64_t>& buf) {
      return multiplex_round(cfg.hub, s, buf, nullptr);
    });
  }
  const std::uint64_t window = static_cast<std::uint64_t>(cfg.hub.cutoff_active);
  return sample_parallel(cfg, fstar, [&](rng::Stream& s, std::vector<std::uint64_t>& buf) {
    return commit_round(cfg.hub, s, buf, window, nullptr);
  });
}

SamplerResult run_sampler_serial(const SamplerConfig& cfg, Strategy strategy) {
  validate_sampler_config(cfg, strategy);
  const double fstar = gate_fstar(cfg.hub, strategy);
  if (fstar < cfg.f_min) return gated_result(cfg, fstar);
  if (strategy == Strategy::multiplex) {
    return sample_serial(cfg, fstar, [&](rng::Stream& s, std::vector<std::uint64_t>& buf) {
      return multiplex_round(cfg.hub, s, buf, nullptr);
    });
  }
  const std::uint64_t window = static_cast<std::uint64_t>(cfg.hub.cutoff_active);
  return sample_serial(cfg, fstar, [&](rng::Stream& s, std::vector<std::uint64_t>& buf) {
    return commit_round(cfg.hub, s, buf, window, nullptr);
  });
}

SamplerResult run_baseline_sampler(const SamplerConfig& cfg) {
  SamplerConfig base = cfg;
  base.hub.servers = 1;
  base.hub.validate();
  if (base.rounds < 1) throw ConfigError("field 'N': sampler needs at least one round");
  const double fstar = worst_case_fidelity_baseline(base.hub);
  if (fstar < base.f_min) return gated_result(base, fstar);
  const std::uint64_t window = static_cast<std::uint64_t>(
      std::min(base.hub.cutoff_idle, base.hub.cutoff_active));
  return sample_parallel(base, fstar, [&](rng::Stream& s, std::vector<std::uint64_t>& buf) {
    return commit_round(base.hub, s, buf, window, nullptr);
  });
}

SamplerResult run_baseline_sampler_serial(const SamplerConfig& cfg) {
  SamplerConfig base = cfg;
  base.hub.servers = 1;
  base.hub.validate();
  if (base.rounds < 1) throw ConfigError("field 'N': sampler needs at least one round");
  const double fstar = worst_case_fidelity_baseline(base.hub);
  if (fstar < base.f_min) return gated_result(base, fstar);
  const std::uint64_t window = static_cast<std::uint64_t>(
      std::min(base.hub.cutoff_idle, base.hub.cutoff_active));
  return sample_serial(base, fstar, [&](rng::Stream& s, std::vector<std::uint64_t>& buf) {
    return commit_round(base.hub, s, buf, window, nullptr);
  });
}

void trace_rounds(const SamplerConfig& cfg, Strategy strategy,
                  const std::function<void(const RoundTrace&)>& visit) {
  validate_sampler_config(cfg, strategy);
  std::vector<std::uint64_t> scratch;
  RoundDetail detail;
  for (std::int64_t i = 0; i < cfg.rounds; ++i) {
    rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(i));
    RoundTrace trace;
    if (strategy == Strategy::multiplex) {
      const RoundOutcome out = multiplex_round(cfg.hub, stream, scratch, &detail);
      trace.success = out.success;
      trace.attempts = out.duration;
      trace.fidelity = out.success ? round_fidelity_multiplex(cfg.hub, detail) : 0.0;
    } else {
      const std::uint64_t window = static_cast<std::uint64_t>(cfg.hub.cutoff_active);
      const RoundOutcome out = commit_round(cfg.hub, stream, scratch, window, &detail);
      trace.success = out.success;
      trace.attempts = out.duration;
      trace.fidelity = out.success ? round_fidelity_commit(cfg.hub, detail) : 0.0;
    }
    visit(trace);
  }
}

namespace {

struct GridPoint {
  double alpha2 = 0.0;
  double xi2 = 0.0;
  bool has_xi2 = false;
  long cutoff_idle = 0;
};

std::vector<GridPoint> enumerate_grid(const HubGrids& grids, bool with_link) {
  if (grids.alpha2.empty() || grids.cutoff_idle.empty()) {
    throw ConfigError("optimizer grids must be non-empty");
  }
  if (with_link && grids.link.kind == ServerLinkModel::Kind::single_click_eg &&
      grids.link.xi2_grid.empty()) {
    throw ConfigError("single-click EG server link needs a non-empty xi2 grid");
  }
  std::vector<GridPoint> out;
  for (double a2 : grids.alpha2) {
    if (a2 <= 0.0 || a2 > grids.alpha2_cap) {
      std::ostringstream os;
      os << "alpha2 grid value " << a2 << " violates the cap " << grids.alpha2_cap;
      throw ConfigError(os.str());
    }
    std::vector<GridPoint> link_points;
    if (with_link && grids.link.kind == ServerLinkModel::Kind::single_click_eg) {
      for (double x : grids.link.xi2_grid) {
        GridPoint g;
        g.alpha2 = a2;
        g.xi2 = validate_probability(x, "xi2");
        g.has_xi2 = true;
        link_points.push_back(g);
      }
    } else {
      GridPoint g;
      g.alpha2 = a2;
      link_points.push_back(g);
    }
    for (GridPoint g : link_points) {
      for (double no : grids.cutoff_idle) {
        if (no < 1.0 || no != std::floor(no)) {
          throw ConfigError("n_o grid values must be positive integers");
        }
        g.cutoff_idle = static_cast<long>(no);
        out.push_back(g);
      }
    }
  }
  return out;
}

HubConfig config_for(const GridPoint& g, int servers, int qubits, const HubTemplate& tmpl,
                     const HubGrids& grids) {
  HubConfig hub;
  hub.servers = servers;
  hub.qubits = qubits;
  hub.p_server_client = validate_probability(2.0 * tmpl.eta_c * g.alpha2, "P_sc");
  if (tmpl.eta_s <= 0.0) throw ConfigError("field 'eta_s': must be > 0");
  hub.f0_rsp = std::max(
      0.0, 1.0 - tmpl.eta_c * (4.0 - 3.0 * tmpl.eta_s) / (16.0 * tmpl.eta_s) * g.alpha2);
  if (g.has_xi2) {
    hub.p_server_server =
        validate_probability(2.0 * tmpl.eta_s * tmpl.eta_s * g.xi2, "P_ss");
    hub.f0_eg = 1.0 - g.xi2;
  } else {
    hub.p_server_server = validate_probability(grids.link.p_fixed, "P_ss");
    hub.f0_eg = validate_probability(grids.link.f0_fixed, "F0_ss");
  }
  hub.cutoff_idle = g.cutoff_idle;
  hub.cutoff_active = tmpl.cutoff_active;
  hub.tau_e = tmpl.tau_e;
  hub.tau_ce = tmpl.tau_ce;
  hub.tau_co = tmpl.tau_co;
  return hub;
}

OptimizeResult optimize_impl(int servers, int qubits, const HubTemplate& tmpl, double f_min,
                             const HubGrids& grids, std::int64_t rounds, std::uint64_t seed,
                             bool baseline) {
  const std::vector<GridPoint> points = enumerate_grid(grids, !baseline);
  OptimizeResult best;
  best.configs_total = points.size();
  double closest_fstar = 0.0;
  bool have_best = false;
  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const HubConfig hub = config_for(points[idx], baseline ? 1 : servers, qubits, tmpl, grids);
    const double fstar =
        baseline ? worst_case_fidelity_baseline(hub) : worst_case_fidelity(hub);
    closest_fstar = std::max(closest_fstar, fstar);
    if (fstar < f_min) continue;
    ++best.configs_feasible;
    SamplerConfig cfg;
    cfg.hub = hub;
    cfg.rounds = rounds;
    cfg.seed = rng::splitmix64(seed ^ rng::splitmix64(idx + 1));
    cfg.f_min = f_min;
    const SamplerResult res =
        baseline ? run_baseline_sampler(cfg) : run_sampler(cfg, Strategy::multiplex);
    if (!have_best || res.rate > best.best.rate) {
      have_best = true;
      best.best = res;
      best.config = hub;
      best.alpha2 = points[idx].alpha2;
      best.xi2 = points[idx].has_xi2 ? points[idx].xi2 : 0.0;
    }
  }
  if (!have_best) {
    std::ostringstream os;
    os << "no grid configuration satisfies the worst-case fidelity gate F* >= " << f_min
       << "; tightest constraint: best reachable F* = " << closest_fstar;
    throw InfeasibleError(os.str());
  }
  return best;
}

}  // namespace

OptimizeResult optimize_hub(int servers, int qubits, const HubTemplate& tmpl, double f_min,
                            const HubGrids& grids, std::int64_t rounds, std::uint64_t seed) {
  if (qubits > servers) {
    throw ConfigError("multiplex optimizer requires M >= s");
  }
  return optimize_impl(servers, qubits, tmpl, f_min, grids, rounds, seed, false);
}

OptimizeResult baseline_rate(int qubits, const HubTemplate& tmpl, double f_min,
                             const HubGrids& grids, std::int64_t rounds, std::uint64_t seed) {
  return optimize_impl(1, qubits, tmpl, f_min, grids, rounds, seed, true);
}

}  // namespace qmux::hub
