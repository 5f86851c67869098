#pragma once

#include <cmath>
#include <functional>

namespace qmux::optim {

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section maximization of f on [lo, hi]. Converges to a bracket of
/// width tol; for monotone f the result sits at the appropriate endpoint.
inline GoldenResult golden_section_max(const std::function<double(double)>& f, double lo,
                                       double hi, double tol = 1e-10, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // Evaluate the surviving candidates plus both endpoints; monotone objectives
  // peak at the boundary and the interior probes alone would miss it.
  GoldenResult best{c, fc};
  if (fd > best.value) best = {d, fd};
  const double flo = f(lo);
  if (flo > best.value) best = {lo, flo};
  const double fhi = f(hi);
  if (fhi > best.value) best = {hi, fhi};
  return best;
}

/// Finds the largest x in [lo, hi] with f(x) >= target, for f non-increasing
/// with f(lo) >= target. Returns hi directly when f(hi) >= target.
inline double bisect_largest_feasible(const std::function<double(double)>& f, double lo,
                                      double hi, double target, double tol = 1e-12,
                                      int max_iter = 200) {
  if (f(hi) >= target) return hi;
  double a = lo, b = hi;  // f(a) >= target > f(b)
  for (int i = 0; i < max_iter && (b - a) > tol * std::max(1.0, std::abs(b)); ++i) {
    const double m = 0.5 * (a + b);
    if (f(m) >= target) {
      a = m;
    } else {
      b = m;
    }
  }
  return a;
}

/// Solves f(x) = target on [lo, hi] for f non-increasing with
/// f(lo) >= target >= f(hi). Plain bisection on the sign change.
inline double bisect_equal(const std::function<double(double)>& f, double lo, double hi,
                           double target, double tol = 1e-14, int max_iter = 200) {
  double a = lo, b = hi;
  for (int i = 0; i < max_iter && (b - a) > tol * std::max(1.0, std::abs(b)); ++i) {
    const double m = 0.5 * (a + b);
    if (f(m) >= target) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace qmux::optim
