#pragma once

// Planar ODE integration on top of Boost.Odeint's controlled Fehlberg 7(8)
// stepper. We drive the stepper ourselves instead of calling
// integrate_adaptive so that we can (a) stop on events located to full
// accuracy and (b) turn step-size collapse into an exception.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "dvdp/errors.hpp"

namespace dvdp::ode {

using State = std::array<double, 2>;

struct Tolerances {
  double abs = 1e-11;
  double rel = 1e-11;
  double dt0 = 1e-2;
  double dt_min = 1e-13;
  std::uint64_t max_steps = 50'000'000;
};

namespace detail {

using Stepper = boost::numeric::odeint::runge_kutta_fehlberg78<State>;
using Controlled = boost::numeric::odeint::controlled_runge_kutta<Stepper>;

inline Controlled make_stepper(const Tolerances& tol) {
  return Controlled(Controlled::error_checker_type(tol.abs, tol.rel));
}

inline void check_finite(const State& s) {
  if (!std::isfinite(s[0]) || !std::isfinite(s[1])) throw NonFinite("state left the finite range");
}

}  // namespace detail

/// Adaptive integration from t0 to t1 (either direction). The optional
/// observer sees every accepted step as (t, state).
template <class Sys, class Obs = std::nullptr_t>
State integrate(Sys&& sys, State s, double t0, double t1, const Tolerances& tol = {},
                Obs&& obs = nullptr) {
  auto stepper = detail::make_stepper(tol);
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  double dt = dir * std::min(tol.dt0, std::abs(t1 - t0));
  auto rhs = [&](const State& x, State& dx, double tt) { sys(x, dx, tt); };
  std::uint64_t steps = 0;
  if constexpr (!std::is_same_v<std::decay_t<Obs>, std::nullptr_t>) obs(t, s);
  while (dir * (t1 - t) > 0.0) {
    if (dir * (t + dt - t1) > 0.0) dt = t1 - t;
    const auto res = stepper.try_step(rhs, s, t, dt);
    if (res == boost::numeric::odeint::success) {
      detail::check_finite(s);
      if constexpr (!std::is_same_v<std::decay_t<Obs>, std::nullptr_t>) obs(t, s);
      if (++steps > tol.max_steps) throw StepFailure("step budget exhausted");
    } else if (std::abs(dt) < tol.dt_min) {
      throw StepFailure("step size underflow at t = " + std::to_string(t));
    }
  }
  return s;
}

struct EventHit {
  bool hit = false;
  double t = 0.0;
  State s{};
};

/// Integrate until g(t, s) changes sign (direction: +1 only upward
/// crossings, -1 only downward, 0 both) or t reaches t_end. The crossing is
/// located by root finding on re-integrations from the last accepted step,
/// so its accuracy is that of the integrator, not of an interpolant.
/// `skip` ignores crossings before t0 + skip (useful when starting on the
/// event surface).
template <class Sys, class G>
EventHit integrate_until(Sys&& sys, State s, double t0, double t_end, G&& g, int direction = 0,
                         const Tolerances& tol = {}, double skip = 0.0) {
  auto stepper = detail::make_stepper(tol);
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  double t = t0;
  double dt = dir * std::min(tol.dt0, std::abs(t_end - t0));
  auto rhs = [&](const State& x, State& dx, double tt) { sys(x, dx, tt); };
  double g_prev = g(t, s);
  std::uint64_t steps = 0;
  while (dir * (t_end - t) > 0.0) {
    if (dir * (t + dt - t_end) > 0.0) dt = t_end - t;
    const State s_prev = s;
    const double t_prev = t;
    const auto res = stepper.try_step(rhs, s, t, dt);
    if (res != boost::numeric::odeint::success) {
      if (std::abs(dt) < tol.dt_min) throw StepFailure("step size underflow at t = " + std::to_string(t));
      continue;
    }
    detail::check_finite(s);
    if (++steps > tol.max_steps) throw StepFailure("step budget exhausted");
    const double g_new = g(t, s);
    const bool armed = dir * (t - t0) > skip;
    auto at = [&](double tau) {
      if (tau == t_prev) return s_prev;
      Tolerances inner = tol;
      inner.dt0 = std::abs(tau - t_prev);
      return integrate(sys, s_prev, t_prev, tau, inner);
    };
    // A step that straddles the end of the skip window is bracketed from
    // there; otherwise a start on the surface (g ~ 1e-15 of either sign)
    // would be found again.
    double ta = t_prev, ga = g_prev;
    if (armed && dir * (t_prev - t0) < skip) {
      ta = t0 + dir * skip;
      ga = g(ta, at(ta));
    }
    const bool up = ga < 0.0 && g_new >= 0.0;
    const bool down = ga > 0.0 && g_new <= 0.0;
    if (armed && ((direction >= 0 && up) || (direction <= 0 && down))) {
      auto h = [&](double tau) { return g(tau, at(tau)); };
      std::uintmax_t it = 100;
      double a = std::min(ta, t), b = std::max(ta, t);
      double ha = h(a), hb = h(b);
      if (ha == 0.0) return {true, a, at(a)};
      if (hb == 0.0) return {true, b, at(b)};
      auto r = boost::math::tools::toms748_solve(h, a, b, ha, hb,
                                                 boost::math::tools::eps_tolerance<double>(50), it);
      const double tc = 0.5 * (r.first + r.second);
      return {true, tc, at(tc)};
    }
    g_prev = g_new;
  }
  return {false, t, s};
}

}  // namespace dvdp::ode
