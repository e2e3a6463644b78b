#pragma once

// Resonance levels omega(I) = (q/p) p4 of the forced system and the averaged
// pendulum model that decides their topology:
//
//   v'' - b (p3 A cos(p v) + B) = mu sigma v',   mu = sqrt(eps),
//
// with B the generating function at the level (prefactor included) and A the
// amplitude of the forcing harmonic. A0(v) = B + p3 A cos(p v) holds with no
// extra constant; A0_numeric checks this by direct quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "dvdp/autonomous.hpp"
#include "dvdp/elliptic.hpp"
#include "dvdp/errors.hpp"
#include "dvdp/geometry.hpp"
#include "dvdp/ode.hpp"
#include "dvdp/params.hpp"
#include "dvdp/quadrature.hpp"

namespace dvdp::resonance {

struct ResonancePair {
  int p = 1;
  int q = 1;

  ResonancePair() = default;
  ResonancePair(int p_, int q_) : p(p_), q(q_) {
    if (p < 1 || q < 1) throw DomainError("resonance pair needs positive integers");
    if (std::gcd(p, q) != 1) throw DomainError("resonance pair must be coprime");
  }
};

enum class Classification { PASSABLE, PARTIALLY_PASSABLE, IMPASSABLE, DEGENERATE };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::PASSABLE: return "PASSABLE";
    case Classification::PARTIALLY_PASSABLE: return "PARTIALLY_PASSABLE";
    case Classification::IMPASSABLE: return "IMPASSABLE";
    case Classification::DEGENERATE: return "DEGENERATE";
  }
  return "?";
}

/// Level with omega = (q/p) p4, found by bracketed root finding in log(rho_c)
/// (omega is monotone in the level in every domain).
inline EnergyLevel resonance_level(const ResonancePair& pr, double p4, DomainTag d) {
  const double target = static_cast<double>(pr.q) / pr.p * p4;
  if (!(target > 0.0) || !std::isfinite(target)) throw NoResonance("target frequency must be positive");
  const bool loop = inside_loop(d);
  if (loop && target >= std::numbers::sqrt2)
    throw NoResonance("loop frequencies lie in (0, sqrt 2); need p > p4/sqrt 2");
  const double rc_hi = loop ? std::nextafter(1.0, 0.0) : std::nextafter(0.5, 0.0);
  const double t_lo = std::log(1e-300), t_hi = std::log(rc_hi);
  auto f = [&](double t) {
    const double rc = std::min(std::exp(t), rc_hi);
    return frequency(level_from_rho_c(rc, d)) - target;
  };
  const double f_lo = f(t_lo), f_hi = f(t_hi);
  if (f_lo > 0.0) throw NoResonance("resonance level closer to the separatrix than rho_c = 1e-300");
  if (f_hi < 0.0) throw NoResonance("target frequency above the domain's range");
  std::uintmax_t it = 300;
  auto r = boost::math::tools::toms748_solve(f, t_lo, t_hi, f_lo, f_hi,
                                             boost::math::tools::eps_tolerance<double>(53), it);
  const double ta = std::abs(f(r.first)) < std::abs(f(r.second)) ? r.first : r.second;
  return level_from_rho_c(std::min(std::exp(ta), rc_hi), d);
}

struct Coefficients {
  double b_closed = 0.0;  // the printed closed form; equals d omega / dh
  double b = 0.0;         // d omega / dI = omega * b_closed, the pendulum coefficient
  double sigma_closed = 0.0;
  double sigma_quadrature = 0.0;  // orbit average of p1 + p2 x - x^2, p2 term included
  double A = 0.0;                 // amplitude of cos(p v); 0 when the harmonic is absent
  bool cos_term = false;
};

/// Inside a loop. Sign of A follows the phase origin at the outer turning
/// point, so it flips between the two loops; only |A| matters for topology.
inline Coefficients coefficients_case1(const EnergyLevel& L, double p1, double p2, int p, double p4) {
  if (!inside_loop(L.domain)) throw DomainError("case 1 needs a loop level");
  if (p < 1) throw DomainError("p must be positive");
  const double rho = L.rho, rc = L.rho_c;
  const auto ke = elliptic::complete_KE_c(rc);
  const double K = ke.K, E = ke.E;
  const double a2 = 1.0 + rc;  // 2 - rho
  Coefficients c;
  c.b_closed = 0.5 * std::numbers::pi * std::pow(a2, 1.5) * (2.0 * rc * K - a2 * E) / (rho * rho * rc * K * K);
  c.b = frequency(L) * c.b_closed;
  c.sigma_closed = p1 - 2.0 * E / (a2 * K);
  c.sigma_quadrature = time_average(L, [&](double x) { return p1 + p2 * x - x * x; });
  const double a = elliptic::nome_ratio_c(rho, rc);
  const double ap = std::pow(a, p);
  c.A = -std::numbers::sqrt2 * p4 * ap / (1.0 + ap * ap);
  if (L.domain == DomainTag::G1_MINUS) c.A = -c.A;
  c.cos_term = true;
  return c;
}

/// Outside the figure-eight. The harmonic exists only for odd p.
inline Coefficients coefficients_case2(const EnergyLevel& L, double p1, double p2, int p, double p4) {
  if (inside_loop(L.domain)) throw DomainError("case 2 needs an exterior level");
  if (p < 1) throw DomainError("p must be positive");
  const double rho = L.rho, rc = L.rho_c;
  const auto ke = elliptic::complete_KE_c(rc);
  const double K = ke.K, E = ke.E;
  const double w = 1.0 - 2.0 * rc;  // 2 rho - 1
  Coefficients c;
  c.b_closed = 0.25 * std::numbers::pi * std::pow(w, 1.5) * (rc * K + w * E) / (rho * rc * K * K);
  c.b = frequency(L) * c.b_closed;
  c.sigma_closed = p1 - 2.0 * (E - rc * K) / (w * K);
  c.sigma_quadrature = time_average(L, [&](double x) { return p1 + p2 * x - x * x; });
  if (p % 2 == 1) {
    const double a = elliptic::nome_ratio_c(rho, rc);
    const double ah = std::pow(a, 0.5 * p);
    c.A = -2.0 * std::numbers::sqrt2 * p4 * ah / (1.0 + ah * ah);
    c.cos_term = true;
  }
  return c;
}

inline Coefficients coefficients(const EnergyLevel& L, const Params& P, const ResonancePair& pr) {
  auto c = inside_loop(L.domain) ? coefficients_case1(L, P.p1, P.p2, pr.p, P.p4)
                                 : coefficients_case2(L, P.p1, P.p2, pr.p, P.p4);
  if (pr.q > 1) {
    c.A = 0.0;
    c.cos_term = false;
  }
  return c;
}

/// A0(v) = (1/2 pi p) int_0^{2 pi p} F1(I, v + q phi/p, phi) dphi by the
/// periodic trapezoid rule along the closed-form orbit, with
/// F1 = [(p1 + p2 x - x^2) y + p3 sin phi] y / omega.
inline double A0_numeric(const EnergyLevel& L, const ResonancePair& pr, double v, const Params& P) {
  const double w = frequency(L);
  const double span = 2.0 * std::numbers::pi * pr.p;
  auto F1 = [&](double phi) {
    const double theta = v + static_cast<double>(pr.q) * phi / pr.p;
    const auto o = orbit_solution(L, theta / w);
    return ((P.p1 + P.p2 * o.x - o.x * o.x) * o.y + P.p3 * std::sin(phi)) * o.y / w;
  };
  return quad::periodic_mean(F1, span, 256, 1e-13, 1 << 22);
}

/// Amplitude of cos(p v) in A0 per unit p3: half the difference between the
/// crest and trough phases.
inline double A_numeric(const EnergyLevel& L, const ResonancePair& pr, Params P) {
  P.p3 = 1.0;
  const double v1 = 0.0, v2 = std::numbers::pi / pr.p;
  return 0.5 * (A0_numeric(L, pr, v1, P) - A0_numeric(L, pr, v2, P));
}

struct PendulumModel {
  double b = 0.0;
  double A = 0.0;  // per unit p3
  double p3 = 0.0;
  double B = 0.0;
  double sigma = 0.0;
  int p = 1;
  double mu = 0.0;

  // right-hand side in slow time: v'' = b (p3 A cos(p v) + B) + mu sigma v'
  double force(double v) const { return b * (p3 * A * std::cos(p * v) + B); }
  bool trusted() const { return mu <= 0.5; }
  /// First-order width of the loop-bifurcation window in B.
  double window() const {
    if (b == 0.0 || p3 * A == 0.0) return 0.0;
    return 4.0 * mu * std::abs(sigma) / (std::numbers::pi * std::abs(b)) *
           std::sqrt(std::abs(b * p3 * A) / p);
  }
};

struct ResonanceZone {
  ResonancePair pair;
  EnergyLevel level{};
  double omega = 0.0;
  Coefficients coeffs;
  double B_value = 0.0;
  Classification classification = Classification::PASSABLE;
};

/// Equilibria of the pendulum: saddle and centre/focus positions in [0, 2 pi/p).
struct PendulumEquilibria {
  bool exist = false;
  double saddle = 0.0;
  double centre = 0.0;
};

inline PendulumEquilibria equilibria(const PendulumModel& m) {
  const double c = m.b * m.p3 * m.A, beta = m.b * m.B;
  PendulumEquilibria e;
  if (c == 0.0 || std::abs(beta) >= std::abs(c)) return e;
  const double u = std::acos(-beta / c) / m.p;  // sin(p u) >= 0
  // saddle where -c p sin(p v) > 0
  e.exist = true;
  e.saddle = c < 0.0 ? u : -u;
  e.centre = -e.saddle;
  return e;
}

/// Follow the unstable separatrix of a saddle in the direction of the mean
/// drive and report whether it reaches the next saddle (a rotational orbit
/// around the cylinder survives) or turns back (the zone traps). Damping is
/// taken as -|sigma|: the topology is the same under time reversal.
inline bool separatrix_passes(const PendulumModel& m) {
  const auto eq = equilibria(m);
  if (!eq.exist) return true;
  const double fp = -m.b * m.p3 * m.A * m.p * std::sin(m.p * eq.saddle);  // > 0
  const double damp = -m.mu * std::abs(m.sigma);
  const double lu = 0.5 * (damp + std::sqrt(damp * damp + 4.0 * fp));
  const double d = m.b * m.B >= 0.0 ? 1.0 : -1.0;
  const double per = 2.0 * std::numbers::pi / m.p;
  const double delta = 1e-7 * per;
  ode::State s{eq.saddle + d * delta, d * delta * lu};
  auto sys = [&](const ode::State& x, ode::State& dx, double) {
    dx[0] = x[1];
    dx[1] = m.force(x[0]) + damp * x[1];
  };
  // positive while moving forward and short of the next saddle
  auto g = [&](double, const ode::State& x) {
    return std::min(d * x[1], per - d * (x[0] - eq.saddle));
  };
  const double t_end = 2000.0 / std::sqrt(fp);
  ode::Tolerances tol;
  tol.abs = 1e-13;
  tol.rel = 1e-12;
  const auto hit = ode::integrate_until(sys, s, 0.0, t_end, g, -1, tol);
  if (!hit.hit) return false;
  return d * (hit.s[0] - eq.saddle) >= per - 1e-9 * per;
}

inline PendulumModel pendulum_model(const ResonanceZone& z, double p3, double eps) {
  PendulumModel m;
  m.b = z.coeffs.b;
  m.A = z.coeffs.A;
  m.p3 = p3;
  m.B = z.B_value;
  m.sigma = z.coeffs.sigma_closed;
  m.p = z.pair.p;
  m.mu = std::sqrt(eps);
  return m;
}

/// Decision table: the harmonic present and |B| < |p3 A| makes the level
/// splittable; it is impassable when B vanishes at the resolution of the
/// averaged model (the separatrix loop does not open around the cylinder),
/// partially passable otherwise. Without the harmonic a nonzero B is
/// passable and B = 0 is degenerate.
inline Classification classify(const ResonanceZone& z, double p3, double eps) {
  const double B = z.B_value;
  const double tiny = 1e-14 * std::max(1.0, std::abs(z.coeffs.A));
  if (!z.coeffs.cos_term || p3 * z.coeffs.A == 0.0) {
    if (std::abs(B) <= tiny) throw DegenerateCase("no harmonic and B = 0");
    return Classification::PASSABLE;
  }
  if (std::abs(B) >= std::abs(p3 * z.coeffs.A)) return Classification::PASSABLE;
  if (std::abs(B) <= tiny) return Classification::IMPASSABLE;
  return separatrix_passes(pendulum_model(z, p3, eps)) ? Classification::PARTIALLY_PASSABLE
                                                        : Classification::IMPASSABLE;
}

inline ResonanceZone make_zone(const ResonancePair& pr, const Params& P, DomainTag d) {
  P.validate();
  ResonanceZone z;
  z.pair = pr;
  z.level = resonance_level(pr, P.p4, d);
  z.omega = frequency(z.level);
  z.coeffs = coefficients(z.level, P, pr);
  z.B_value = autonomous::B_level(z.level, P.p1, P.p2);
  try {
    z.classification = classify(z, P.p3, P.eps);
  } catch (const DegenerateCase&) {
    z.classification = Classification::DEGENERATE;
  }
  return z;
}

/// Sample trajectories of the pendulum model on the cylinder for portraits.
inline std::vector<std::vector<std::array<double, 2>>> pendulum_trajectories(const PendulumModel& m, int n,
                                                                            double t_max, double dt) {
  std::vector<std::vector<std::array<double, 2>>> out;
  const double per = 2.0 * std::numbers::pi / m.p;
  const double vmax = std::sqrt(std::abs(m.b * m.p3 * m.A) + std::abs(m.b * m.B)) * 2.5 + 1e-3;
  auto sys = [&](const ode::State& x, ode::State& dx, double) {
    dx[0] = x[1];
    dx[1] = m.force(x[0]) + m.mu * m.sigma * x[1];
  };
  for (int i = 0; i < n; ++i) {
    const double v0 = per * (i % 4) / 4.0;
    const double u0 = -vmax + 2.0 * vmax * (i + 0.5) / n;
    std::vector<std::array<double, 2>> tr;
    ode::State s{v0, u0};
    tr.push_back(s);
    for (double t = 0.0; t < t_max; t += dt) {
      s = ode::integrate(sys, s, t, t + dt);
      tr.push_back(s);
      if (std::abs(s[1]) > 10.0 * vmax) break;
    }
    out.push_back(std::move(tr));
  }
  return out;
}

// ---------------------------------------------------------------- alignment

struct Alignment {
  double p1 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double p4 = 0.0;
  double residual_B1 = 0.0;  // |B10+(rho1)|
  double residual_B2 = 0.0;  // |B10+(rho2)|
  double ratio = 0.0;        // omega(rho1)/omega(rho2)
};

namespace detail {

inline std::pair<double, double> right_loop_pair(double p1, double p2) {
  const auto c = autonomous::find_cycles(p1, p2);
  std::vector<double> r;
  for (const auto& cy : c.cycles)
    if (cy.domain == DomainTag::G1_PLUS) r.push_back(cy.rho);
  if (r.size() != 2) throw NoSolution("right loop does not carry two cycles");
  std::sort(r.begin(), r.end());
  return {r[0], r[1]};
}

inline double loop_omega(double rho) { return frequency(level_from_rho(rho, DomainTag::G1_PLUS)); }

}  // namespace detail

/// Parameters where the two right-loop cycles sit on the p_a:1 and p_b:1
/// resonance levels of one forcing frequency. The two-cycle wedge at fixed p2
/// spans p1 from the double-cycle curve to the nearer of L1+ and L2+; inside
/// it p_a omega(rho1) - p_b omega(rho2) changes sign once.
inline Alignment align_cycles_with_resonances(double p2, int p_a = 2, int p_b = 3) {
  const auto sep = autonomous::separatrix_limit_exact();
  const auto foc = autonomous::focus_limit_exact();
  if (!(p2 > sep.second && p2 < foc.second)) throw NoSolution("p2 outside the two-cycle range");
  // double-cycle curve at this p2
  auto dc = [&](double t) { return autonomous::double_cycle_point(std::exp(t)).p2 - p2; };
  const int n = 200;
  const double t0 = std::log(1e-12), t1 = std::log(0.999);
  double pa = 0.0;
  bool found = false;
  double prev_t = t0, prev_v = dc(t0);
  for (int i = 1; i <= n && !found; ++i) {
    const double t = t0 + (t1 - t0) * i / n;
    const double v = dc(t);
    if ((v > 0) != (prev_v > 0)) {
      std::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve(dc, prev_t, t, prev_v, v,
                                                 boost::math::tools::eps_tolerance<double>(50), it);
      pa = autonomous::double_cycle_point(std::exp(0.5 * (r.first + r.second))).p1;
      found = true;
    }
    prev_t = t;
    prev_v = v;
  }
  if (!found) throw NoSolution("double-cycle curve does not reach this p2");
  const double e1 = 1.0 - p2, e2 = (4.0 - autonomous::kH * p2) / 5.0;
  const double lo = std::min({pa, e1, e2}), hi = std::max({pa, e1, e2});
  auto R = [&](double p1) {
    const auto [r1, r2] = detail::right_loop_pair(p1, p2);
    return p_a * detail::loop_omega(r1) - p_b * detail::loop_omega(r2);
  };
  const int m = 400;
  double xa = 0.0, xb = 0.0, fa = 0.0, fb = 0.0;
  bool have_prev = false, bracket = false;
  for (int i = 0; i <= m && !bracket; ++i) {
    const double p1 = lo + (hi - lo) * i / m;
    double v;
    try {
      v = R(p1);
    } catch (const NoSolution&) {
      have_prev = false;
      continue;
    }
    if (have_prev && (v > 0) != (fb > 0)) {
      xa = xb;
      fa = fb;
      xb = p1;
      fb = v;
      bracket = true;
      break;
    }
    xb = p1;
    fb = v;
    have_prev = true;
  }
  if (!bracket) throw NoSolution("no frequency alignment inside the two-cycle wedge");
  std::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(R, xa, xb, fa, fb, boost::math::tools::eps_tolerance<double>(50), it);
  Alignment al;
  al.p1 = 0.5 * (r.first + r.second);
  std::tie(al.rho1, al.rho2) = detail::right_loop_pair(al.p1, p2);
  al.p4 = p_a * detail::loop_omega(al.rho1);
  al.residual_B1 = std::abs(autonomous::B10(al.rho1, al.p1, p2, 1));
  al.residual_B2 = std::abs(autonomous::B10(al.rho2, al.p1, p2, 1));
  al.ratio = detail::loop_omega(al.rho1) / detail::loop_omega(al.rho2);
  return al;
}

// ---------------------------------------------------------------- census

struct CensusEntry {
  int p = 0;
  bool resonant = false;  // false when p <= p4/sqrt 2 in a loop
  ResonanceZone zone;
  bool splittable = false;
};

struct SplittableCensus {
  std::vector<CensusEntry> entries;
  int splittable_count = 0;
  double decay_ratio = 0.0;  // |A(p_max)| / |A(p_max - 1)| among resonant entries
};

/// All (p,1) resonances up to p_max with their classification.
inline SplittableCensus splittable_census(const Params& P, DomainTag d, int p_max) {
  SplittableCensus out;
  for (int p = 1; p <= p_max; ++p) {
    CensusEntry e;
    e.p = p;
    try {
      e.zone = make_zone(ResonancePair(p, 1), P, d);
      e.resonant = true;
      const auto& c = e.zone.coeffs;
      e.splittable = c.cos_term && std::abs(e.zone.B_value) < std::abs(P.p3 * c.A);
      if (e.splittable) ++out.splittable_count;
    } catch (const NoResonance&) {
    }
    out.entries.push_back(e);
  }
  for (std::size_t i = out.entries.size(); i-- > 1;) {
    const auto& a = out.entries[i];
    const auto& b = out.entries[i - 1];
    if (a.resonant && b.resonant && a.zone.coeffs.A != 0.0 && b.zone.coeffs.A != 0.0) {
      out.decay_ratio = std::abs(a.zone.coeffs.A / b.zone.coeffs.A);
      break;
    }
  }
  return out;
}

}  // namespace dvdp::resonance
