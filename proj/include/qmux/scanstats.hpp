#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmux/core.hpp"

// The window problem: expected number of i.i.d. Bernoulli(p) attempts until
// s successes fall within a sliding window of w attempts, plus the
// semiclassical multiplexing limits built on top of it.

namespace qmux::scan {

struct WindowSpec {
  long window_length = 1;    // w; ignored when infinite_window is set
  int required_successes = 1;  // s
  double success_prob = 1.0;   // p, in (0, 1]
  bool infinite_window = false;

  static WindowSpec finite(long w, int s, double p);
  static WindowSpec infinite(int s, double p);
};

enum class Method { exact_markov, asymptotic_low_p, infinite_window };

struct WindowExpectation {
  double expected_attempts = 0.0;
  Method method = Method::exact_markov;
};

inline constexpr std::size_t kDefaultMaxStates = 4096;

/// Binomial coefficient in double precision; exact while the result and all
/// intermediates stay below 2^53.
double binomial(long n, long k);

/// Number of chain states the exact solver would allocate for (w, s).
double exact_state_count(long w, int s);

/// Exact E[tau_{w,s,p}] via an absorbing Markov chain whose state is the set
/// of success ages within the last w-1 attempts (at most s-1 of them). The
/// dense linear solve is O(states^3); inputs whose state count exceeds
/// max_states are rejected with the computed count.
WindowExpectation expected_attempts_exact(const WindowSpec& spec,
                                          std::size_t max_states = kDefaultMaxStates);

/// Low-p asymptotic 1 / (C(w-1, s-1) p^s).
WindowExpectation expected_attempts_low_p(const WindowSpec& spec);

/// Single-qubit temporal multiplexing gain (1 - (1-p)^M) / p, bound M.
GainReport temporal_gain_single(double p, int M);

/// s-qubit temporal gain upper bound m_s* = M E[tau_{w,s,p}] / E[tau_{Mw,s,p}],
/// both expectations from the exact solver. The reported value is an upper
/// bound on the true multiplexed gain m_s.
GainReport temporal_gain_s(double p, long w, int M, int s,
                           std::size_t max_states = kDefaultMaxStates);

/// p -> 0 limit of the above: M C(Mw-1, s-1) / C(w-1, s-1).
double temporal_gain_s_low_p_limit(long w, int M, int s);

/// Limit 1: m <= M (requires M <= M_c, else channel capacity is exceeded).
double classical_bound_single(int M, int M_c);

/// Limit 2: m_s <= M C(Ms-1, s-1).
double classical_bound_s(int M, int s);

/// Limit 2 in the w >> s regime: m_s <= M^s.
double classical_bound_s_wide_window(int M, int s);

struct WindowBound {
  bool unbounded = false;  // F_min at or below the fully mixed value 2^-s
  long window = 1;
};

/// Worse-than-worst-case window bound
/// w = floor((T2/tau_e) ln[(2F0-1)(1-2^-s) / (F_min-2^-s)]), clamped to >= 1.
WindowBound window_bound_for_fidelity(double f_min, double f0, int s, double t2, double tau_e);

struct MonotonicityPoint {
  double p = 0.0;
  double deriv_w = 0.0;        // d/dp E[tau_{w,s,p}], central difference
  double deriv_scaled_w = 0.0; // d/dp E[tau_{Mw,s,p}]
  double gain_upper = 0.0;     // m_s*(p)
  bool ordering_ok = false;    // 0 >= deriv_scaled_w >= deriv_w
};

struct MonotonicityReport {
  std::vector<MonotonicityPoint> points;
  bool ordering_ok_all = false;
  bool gain_monotone_decreasing = false;
};

/// Numerically probes the derivative-ordering assumption behind the
/// semiclassical limits and the monotonicity of m_s*(p) on a p grid.
MonotonicityReport check_monotonicity_assumption(long w, int s, int M,
                                                 std::span<const double> p_grid,
                                                 std::size_t max_states = kDefaultMaxStates);

}  // namespace qmux::scan
