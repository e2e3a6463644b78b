#pragma once

// Thin wrappers over Boost quadrature with the failure policy the library
// wants: a QuadratureFailure instead of a silently inaccurate number.

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dvdp/errors.hpp"

namespace dvdp::quad {

struct Options {
  double tol = 1e-12;      // relative tolerance; 1e-13 drives Boost into roundoff-level recursion
                           // whose summed error estimate is meaningless
  unsigned max_depth = 18;
  double accept = 1e-9;    // relative error estimate above which we give up
};

struct Estimate {
  double value = 0.0;
  double err = 0.0;
  double l1 = 0.0;
  Estimate& operator+=(const Estimate& o) {
    value += o.value;
    err += o.err;
    l1 += o.l1;
    return *this;
  }
};

template <class F>
Estimate estimate(F&& f, double a, double b, const Options& opt = {}) {
  Estimate e;
  e.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, opt.max_depth, opt.tol, &e.err, &e.l1);
  return e;
}

inline double accept(const Estimate& e, const Options& opt = {}) {
  if (!std::isfinite(e.value)) throw QuadratureFailure("non-finite integral");
  if (e.err > opt.accept * std::max(e.l1, 1e-300) && e.err > 1e-300)
    throw QuadratureFailure("error estimate " + std::to_string(e.err) + " exceeds acceptance");
  return e.value;
}

// Adaptive 61-point Gauss-Kronrod on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, const Options& opt = {}) {
  return accept(estimate(f, a, b, opt), opt);
}

// Trapezoid rule for a smooth periodic integrand on [0, period), doubling the
// node count until two successive estimates agree relative to the mean of
// |f| (the cancellation-aware scale). Exponentially convergent for analytic
// integrands, which is the only case we use it for.
template <class F>
double periodic_mean(F&& f, double period, int n0 = 64, double tol = 1e-13,
                     int n_max = 1 << 20) {
  double total = 0.0, total_abs = 0.0;
  auto add = [&](int n, bool odd_only) {
    for (int i = odd_only ? 1 : 0; i < n; i += odd_only ? 2 : 1) {
      const double v = f(period * static_cast<double>(i) / n);
      total += v;
      total_abs += std::abs(v);
    }
  };
  int n = n0;
  add(n, false);
  double prev = total / n;
  while (n < n_max) {
    add(2 * n, true);
    n *= 2;
    const double cur = total / n;
    if (!std::isfinite(cur)) throw QuadratureFailure("non-finite periodic mean");
    if (std::abs(cur - prev) <= tol * std::max(std::abs(cur), total_abs / n)) return cur;
    prev = cur;
  }
  throw QuadratureFailure("periodic trapezoid did not converge");
}

}  // namespace dvdp::quad
