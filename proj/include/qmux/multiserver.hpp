#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qmux/core.hpp"

// Multi-server multiplexing: one client prepares s qubits across M servers
// via RSP, then consolidates them onto the first-success server through
// server-server EG. Includes the analytic s=2 rates, the decoherence-budget
// fidelity machinery, a Monte Carlo sampler with counter-based RNG, and the
// grid optimizer that produces the rate-fidelity and gain-vs-M sweeps.

namespace qmux::hub {

enum class Strategy { try_and_commit, multiplex };

struct HubConfig {
  int servers = 1;               // M
  int qubits = 1;                // s
  double p_server_client = 1.0;  // P_sc, per-attempt RSP success
  double p_server_server = 1.0;  // P_ss, per-attempt EG success
  long cutoff_active = 1;        // n_e, max attempts while a node holds a qubit and works
  long cutoff_idle = 1;          // n_o, max idle attempts (RSP completion spread)
  double tau_e = 1.0;            // attempt duration, seconds
  double tau_ce = 1.0;           // coherence time during EG/RSP activity
  double tau_co = 1.0;           // coherence time while idle
  double f0_rsp = 1.0;           // intrinsic per-qubit RSP fidelity
  double f0_eg = 1.0;            // intrinsic EG Bell fidelity

  void validate() const;  // throws ConfigError
};

struct SamplerConfig {
  HubConfig hub;
  std::int64_t rounds = 1;  // N
  std::uint64_t seed = 0;
  double f_min = 0.0;
};

struct SamplerResult {
  double p_succ = 0.0;
  double mean_attempts = 0.0;
  double rate = 0.0;         // p_succ / mean_attempts, per tau_e
  double stderr_rate = 0.0;  // delta-method standard error of the ratio
  double worst_case_fidelity = 1.0;
  std::uint64_t n_success = 0;
  std::uint64_t n_rounds = 0;
  bool gated = false;  // true when F* < F_min short-circuited the run
};

/// Single-qubit multi-server gain M (1-p)^{M-1}, classical bound M.
GainReport single_qubit_hub_gain(double p, int servers);

struct AnalyticRate {
  double rate = 0.0;
  bool underflow = false;  // some (1-P)^n underflowed even in log space
};

/// Closed-form s=2 rates for both strategies, exactly as the renewal model
/// defines them (tau_e = 1). Rejects hubs with qubits != 2.
AnalyticRate analytic_rate_s2(const HubConfig& hub, Strategy strategy);

struct GainS2 {
  GainReport report;           // vs the M=1 try-and-commit rate, bound M^2
  double asymptotic_bound = 0; // M for t; M(M-1) n_o n_e/n_e' for m (n_e' = n_e here)
};

GainS2 analytic_gain_s2(const HubConfig& hub, Strategy strategy);

struct Exposure {
  double active_attempts = 0.0;  // time spent at a node that is running EG/RSP
  double idle_attempts = 0.0;
};

/// Pure storage fidelity (1/2^s) prod_i (1 + e^{-t_ie tau_e/tau_ce - t_io tau_e/tau_co}).
double storage_fidelity(std::span<const Exposure> exposures, const HubConfig& hub);

/// Expectation of e^{-t tau_e / tau} for a success-conditioned truncated
/// geometric holding time: sum_{n=1..n_cut} P(n|success) e^{-n tau_e/tau}.
double expected_exposure_factor(double p, long n_cut, double tau_e, double tau);

/// Worst-case fidelity F*: every RSP spread at the idle cutoff, every EG
/// stage at the active cutoff, composed with the intrinsic fidelities by
/// multiplying coherence terms. Round acceptance at these cutoffs guarantees
/// every delivered state has fidelity >= F*.
double worst_case_fidelity(const HubConfig& hub);

/// F* of the single-server baseline: s sequential RSPs, all storage active.
double worst_case_fidelity_baseline(const HubConfig& hub);

/// Monte Carlo sampler. Parallelized over rounds with per-round counter RNG
/// streams; results are bit-identical for any thread count. The multiplex
/// strategy draws M RSP completions and s-1 EG durations per round; rounds
/// abort at their cutoffs, so failed stages contribute the cutoff duration.
SamplerResult run_sampler(const SamplerConfig& cfg, Strategy strategy = Strategy::multiplex);

/// Serial reference implementation; must produce results identical to
/// run_sampler bit for bit.
SamplerResult run_sampler_serial(const SamplerConfig& cfg,
                                 Strategy strategy = Strategy::multiplex);

/// Baseline sampler: all s qubits sequentially on one server, success iff the
/// completion spread fits min(n_o, n_e).
SamplerResult run_baseline_sampler(const SamplerConfig& cfg);
SamplerResult run_baseline_sampler_serial(const SamplerConfig& cfg);

struct RoundTrace {
  bool success = false;
  std::uint64_t attempts = 0;
  double fidelity = 1.0;  // storage+intrinsic fidelity from the drawn times
};

/// Serial instrumented walk over rounds, for tests and diagnostics.
void trace_rounds(const SamplerConfig& cfg, Strategy strategy,
                  const std::function<void(const RoundTrace&)>& visit);

struct ServerLinkModel {
  enum class Kind { single_click_eg, fixed };
  Kind kind = Kind::fixed;
  std::vector<double> xi2_grid;  // used by single_click_eg
  double p_fixed = 0.44;         // optimistic double-click preset
  double f0_fixed = 1.0 - 1e-3;
};

struct HubGrids {
  std::vector<double> alpha2;       // WCP mean photon numbers (cap enforced)
  std::vector<double> cutoff_idle;  // n_o candidates
  ServerLinkModel link;
  double alpha2_cap = 0.5;
};

struct HubTemplate {
  double eta_c = 1e-3;        // client-server channel efficiency
  double eta_s = 1e-1;        // server-server / server-station efficiency
  double tau_e = 300e-9;
  double tau_ce = 20e-3;
  double tau_co = 2.8;
  long cutoff_active = 1000;  // n_e
};

struct OptimizeResult {
  SamplerResult best;
  HubConfig config;
  double alpha2 = 0.0;
  double xi2 = 0.0;  // 0 when the fixed server link preset is used
  std::size_t configs_total = 0;
  std::size_t configs_feasible = 0;
};

/// Grid search over (alpha2, server link, n_o): maps parameters to link
/// probabilities via the protocol table, filters by F* >= f_min, samples the
/// rest, returns the best rate (first grid point wins ties). Deterministic
/// for a fixed seed and any thread count.
OptimizeResult optimize_hub(int servers, int qubits, const HubTemplate& tmpl, double f_min,
                            const HubGrids& grids, std::int64_t rounds, std::uint64_t seed);

/// Best single-server baseline rate over the same grids (the gain denominator).
OptimizeResult baseline_rate(int qubits, const HubTemplate& tmpl, double f_min,
                             const HubGrids& grids, std::int64_t rounds, std::uint64_t seed);

}  // namespace qmux::hub
