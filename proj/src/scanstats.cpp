#include "qmux/scanstats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmux::scan {

namespace {

void validate_spec(const WindowSpec& spec) {
  validate_probability(spec.success_prob, "p");
  if (spec.success_prob <= 0.0) throw ConfigError("field 'p': must be in (0, 1]");
  if (spec.required_successes < 1) throw ConfigError("field 's': must be >= 1");
  if (!spec.infinite_window) {
    if (spec.window_length < 1) throw ConfigError("field 'w': must be >= 1");
    if (spec.required_successes > spec.window_length) {
      throw ConfigError("field 's': required successes exceed the window length");
    }
  }
}

// Dense LU with partial pivoting, solving A x = b in place.
void solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(a[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a[i * n + k]);
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best == 0.0) throw Error("window solver: singular chain matrix");
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pivot * n + j]);
      std::swap(b[k], b[pivot]);
    }
    const double inv = 1.0 / a[k * n + k];
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 256)
#endif
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(k) + 1; i < rows; ++i) {
      const double f = a[static_cast<std::size_t>(i) * n + k] * inv;
      if (f == 0.0) continue;
      a[static_cast<std::size_t>(i) * n + k] = f;
      for (std::size_t j = k + 1; j < n; ++j) {
        a[static_cast<std::size_t>(i) * n + j] -= f * a[k * n + j];
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    double acc = b[i];
    for (std::size_t j = 0; j < i; ++j) acc -= a[i * n + j] * b[j];
    b[i] = acc;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= a[ii * n + j] * b[j];
    b[ii] = acc / a[ii * n + ii];
  }
}

void enumerate_masks(int bits, int max_pop, std::vector<std::uint64_t>& out) {
  out.push_back(0);
  std::vector<int> idx;
  for (int k = 1; k <= max_pop && k <= bits; ++k) {
    idx.assign(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      std::uint64_t m = 0;
      for (int i = 0; i < k; ++i) m |= 1ull << idx[static_cast<std::size_t>(i)];
      out.push_back(m);
      int pos = k - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == bits - k + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < k; ++i) {
        idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
      }
    }
  }
}

double geometric_stages_mean(int s, double p) { return static_cast<double>(s) / p; }

}  // namespace

WindowSpec WindowSpec::finite(long w, int s, double p) {
  WindowSpec spec{w, s, p, false};
  validate_spec(spec);
  return spec;
}

WindowSpec WindowSpec::infinite(int s, double p) {
  WindowSpec spec{0, s, p, true};
  validate_spec(spec);
  return spec;
}

double binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double res = 1.0;
  for (long i = 1; i <= k; ++i) {
    res = res * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return res;
}

double exact_state_count(long w, int s) {
  double count = 0.0;
  const int cap = std::min<long>(s - 1, w - 1);
  for (int k = 0; k <= cap; ++k) count += binomial(w - 1, k);
  return count;
}

WindowExpectation expected_attempts_exact(const WindowSpec& spec, std::size_t max_states) {
  validate_spec(spec);
  const double p = spec.success_prob;
  const int s = spec.required_successes;
  if (spec.infinite_window) {
    return {geometric_stages_mean(s, p), Method::infinite_window};
  }
  const long w = spec.window_length;
  const double count = exact_state_count(w, s);
  if (count > static_cast<double>(max_states)) {
    std::ostringstream os;
    os << "window state space too large: " << count << " states for (w=" << w << ", s=" << s
       << "), limit " << max_states;
    throw ConfigError(os.str());
  }

  const int bits = static_cast<int>(w - 1);
  std::vector<std::uint64_t> states;
  states.reserve(static_cast<std::size_t>(count));
  enumerate_masks(bits, s - 1, states);
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(states.size() * 2);
  for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], i);

  const std::uint64_t mask = bits > 0 ? ((1ull << bits) - 1) : 0ull;
  const std::size_t n = states.size();
  std::vector<double> a(n * n, 0.0);
  std::vector<double> b(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t m = states[i];
    a[i * n + i] += 1.0;
    const std::uint64_t shifted = (m << 1) & mask;
    a[i * n + index.at(shifted)] -= 1.0 - p;
    // A success from a state already holding s-1 tracked successes absorbs;
    // otherwise it joins the history at age 1.
    if (std::popcount(m) < s - 1) {
      a[i * n + index.at(shifted | 1ull)] -= p;
    }
  }
  solve_dense(a, b, n);
  return {b[index.at(0)], Method::exact_markov};
}

WindowExpectation expected_attempts_low_p(const WindowSpec& spec) {
  validate_spec(spec);
  if (spec.infinite_window) {
    throw ConfigError("low-p asymptotic requires a finite window");
  }
  const double log_binom =
      std::log(binomial(spec.window_length - 1, spec.required_successes - 1));
  const double log_val =
      -(log_binom + spec.required_successes * std::log(spec.success_prob));
  if (log_val > std::log(std::numeric_limits<double>::max())) {
    throw Error("low-p window expectation overflows double range");
  }
  return {std::exp(log_val), Method::asymptotic_low_p};
}

GainReport temporal_gain_single(double p, int M) {
  validate_probability(p, "p");
  if (p <= 0.0) throw ConfigError("field 'p': must be in (0, 1]");
  if (M < 1) throw ConfigError("field 'M': must be >= 1");
  const double batched = -std::expm1(static_cast<double>(M) * std::log1p(-p));
  return GainReport::from_rates(batched, p, static_cast<double>(M));
}

GainReport temporal_gain_s(double p, long w, int M, int s, std::size_t max_states) {
  if (M < 1) throw ConfigError("field 'M': must be >= 1");
  const WindowSpec base = WindowSpec::finite(w, s, p);
  const WindowSpec scaled = WindowSpec::finite(w * M, s, p);
  const double e_base = expected_attempts_exact(base, max_states).expected_attempts;
  const double e_scaled = expected_attempts_exact(scaled, max_states).expected_attempts;
  // Attempts in the multiplexed protocol last 1/M of a baseline attempt, so
  // the multiplexed rate per baseline attempt duration is M / E[tau_{Mw}].
  return GainReport::from_rates(static_cast<double>(M) / e_scaled, 1.0 / e_base,
                                classical_bound_s(M, s));
}

double temporal_gain_s_low_p_limit(long w, int M, int s) {
  if (M < 1) throw ConfigError("field 'M': must be >= 1");
  if (s < 1 || s > w) throw ConfigError("field 's': must satisfy 1 <= s <= w");
  return static_cast<double>(M) * binomial(static_cast<long>(M) * w - 1, s - 1) /
         binomial(w - 1, s - 1);
}

double classical_bound_single(int M, int M_c) {
  if (M < 1 || M_c < 1) throw ConfigError("field 'M': must be >= 1");
  if (M > M_c) {
    std::ostringstream os;
    os << "channel capacity exceeded: M=" << M << " > M_c=" << M_c;
    throw InfeasibleError(os.str());
  }
  return static_cast<double>(M);
}

double classical_bound_s(int M, int s) {
  if (M < 1 || s < 1) throw ConfigError("bound requires M >= 1 and s >= 1");
  return static_cast<double>(M) * binomial(static_cast<long>(M) * s - 1, s - 1);
}

double classical_bound_s_wide_window(int M, int s) {
  if (M < 1 || s < 1) throw ConfigError("bound requires M >= 1 and s >= 1");
  return std::pow(static_cast<double>(M), static_cast<double>(s));
}

WindowBound window_bound_for_fidelity(double f_min, double f0, int s, double t2, double tau_e) {
  validate_probability(f_min, "F_min");
  validate_probability(f0, "F_0");
  if (s < 1) throw ConfigError("field 's': must be >= 1");
  if (f0 <= 0.5) throw ConfigError("field 'F_0': must exceed 1/2");
  if (t2 <= 0.0 || tau_e <= 0.0) throw ConfigError("T2 and tau_e must be > 0");
  const double floor_fid = std::exp2(-static_cast<double>(s));
  if (f_min <= floor_fid) {
    return WindowBound{true, 0};
  }
  if (f_min > f0) {
    std::ostringstream os;
    os << "target fidelity " << f_min << " unreachable: exceeds per-qubit fidelity " << f0;
    throw InfeasibleError(os.str());
  }
  const double arg = (2.0 * f0 - 1.0) * (1.0 - floor_fid) / (f_min - floor_fid);
  const double w_real = (t2 / tau_e) * std::log(arg);
  long w = static_cast<long>(std::floor(w_real));
  if (w < 1) w = 1;
  return WindowBound{false, w};
}

MonotonicityReport check_monotonicity_assumption(long w, int s, int M,
                                                 std::span<const double> p_grid,
                                                 std::size_t max_states) {
  if (M < 1) throw ConfigError("field 'M': must be >= 1");
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (p_grid[i] <= 0.0 || p_grid[i] >= 1.0) {
      throw ConfigError("p grid values must lie strictly inside (0, 1)");
    }
    if (i > 0 && p_grid[i] <= p_grid[i - 1]) {
      throw ConfigError("p grid must be sorted ascending");
    }
  }

  MonotonicityReport report;
  report.points.assign(p_grid.size(), MonotonicityPoint{});
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(p_grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double p = p_grid[static_cast<std::size_t>(i)];
    double h = std::max(1e-4, p * 1e-3);
    h = std::min({h, p / 2.0, (1.0 - p) / 2.0});
    auto expect = [&](long ww, double pp) {
      return expected_attempts_exact(WindowSpec::finite(ww, s, pp), max_states)
          .expected_attempts;
    };
    MonotonicityPoint pt;
    pt.p = p;
    pt.deriv_w = (expect(w, p + h) - expect(w, p - h)) / (2.0 * h);
    pt.deriv_scaled_w = (expect(w * M, p + h) - expect(w * M, p - h)) / (2.0 * h);
    pt.gain_upper = static_cast<double>(M) * expect(w, p) / expect(w * M, p);
    const double scale = std::max({1.0, std::abs(pt.deriv_w), std::abs(pt.deriv_scaled_w)});
    pt.ordering_ok = pt.deriv_scaled_w <= scale * 1e-7 &&
                     pt.deriv_scaled_w - pt.deriv_w >= -scale * 1e-7;
    report.points[static_cast<std::size_t>(i)] = pt;
  }

  report.ordering_ok_all = true;
  report.gain_monotone_decreasing = true;
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    if (!report.points[i].ordering_ok) report.ordering_ok_all = false;
    if (i > 0) {
      const double prev = report.points[i - 1].gain_upper;
      if (report.points[i].gain_upper > prev * (1.0 + 1e-9) + 1e-12) {
        report.gain_monotone_decreasing = false;
      }
    }
  }
  return report;
}

}  // namespace qmux::scan
