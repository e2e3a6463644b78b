#pragma once

// Integrable system  x'' - x + x^3 = 0,  H = y^2/2 - x^2/2 + x^4/4.
//
// Closed orbits are labelled by the elliptic parameter rho:
//   inside a loop (-1/4 < h < 0):  rho = 2s/(1+s),   s = sqrt(1+4h)
//   outside the figure-eight (h>0): rho = (1+s)/(2s)
// Levels carry rho_c = 1 - rho alongside rho. Near the separatrix rho_c is
// the quantity with information in it, and everything downstream (K, the
// nome, turning points) is evaluated from rho_c.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include "dvdp/elliptic.hpp"
#include "dvdp/errors.hpp"
#include "dvdp/quadrature.hpp"

namespace dvdp {

enum class DomainTag { G1_PLUS, G1_MINUS, G2 };

inline const char* to_string(DomainTag d) {
  switch (d) {
    case DomainTag::G1_PLUS: return "G1+";
    case DomainTag::G1_MINUS: return "G1-";
    case DomainTag::G2: return "G2";
  }
  return "?";
}

inline bool inside_loop(DomainTag d) { return d != DomainTag::G2; }

struct EnergyLevel {
  DomainTag domain;
  double h;
  double rho;
  double rho_c;  // 1 - rho, carried exactly
};

struct OrbitPoint {
  double x;
  double y;
  double t;
};

inline double hamiltonian(double x, double y) {
  const double x2 = x * x;
  return 0.5 * y * y - 0.5 * x2 + 0.25 * x2 * x2;
}

inline EnergyLevel level_from_h(double h, DomainTag d) {
  if (inside_loop(d)) {
    if (!(h > -0.25 && h < 0.0)) throw DomainError("loop level needs -1/4 < h < 0");
    const double s = std::sqrt(1.0 + 4.0 * h);
    const double rc = -4.0 * h / ((1.0 + s) * (1.0 + s));
    return {d, h, 2.0 * s / (1.0 + s), rc};
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("exterior level needs h > 0");
  const double s = std::sqrt(1.0 + 4.0 * h);
  const double rc = 4.0 * h / ((1.0 + s) * 2.0 * s);
  return {d, h, (1.0 + s) / (2.0 * s), rc};
}

/// Level from the complementary parameter; rho_c in (0,1) inside the loops,
/// (0,1/2) outside.
inline EnergyLevel level_from_rho_c(double rc, DomainTag d) {
  if (inside_loop(d)) {
    if (!(rc > 0.0 && rc < 1.0)) throw DomainError("loop level needs 0 < rho < 1");
    const double h = -rc / ((1.0 + rc) * (1.0 + rc));
    return {d, h, 1.0 - rc, rc};
  }
  if (!(rc > 0.0 && rc < 0.5)) throw DomainError("exterior level needs 1/2 < rho < 1");
  const double rho = 1.0 - rc;
  const double w = 1.0 - 2.0 * rc;  // 2 rho - 1
  return {d, rho * rc / (w * w), rho, rc};
}

inline EnergyLevel level_from_rho(double rho, DomainTag d) {
  return level_from_rho_c(1.0 - rho, d);
}

struct TurningPoints {
  double x_max;  // outer turning point (positive for G1+ and G2)
  double x_min;  // inner turning point in a loop; for G2, c with x^2 + c^2 factor
};

// Positive-x description: for G1- callers mirror the sign.
inline TurningPoints turning_points(const EnergyLevel& L) {
  const double rc = L.rho_c;
  if (inside_loop(L.domain))
    return {std::sqrt(2.0 / (1.0 + rc)), std::sqrt(2.0 * rc / (1.0 + rc))};
  const double w = 1.0 - 2.0 * rc;
  return {std::sqrt(2.0 * L.rho / w), std::sqrt(2.0 * rc / w)};
}

inline double frequency(const EnergyLevel& L) {
  const double K = elliptic::complete_K_c(L.rho_c);
  if (inside_loop(L.domain)) return std::numbers::pi / (std::sqrt(1.0 + L.rho_c) * K);
  return std::numbers::pi / (2.0 * std::sqrt(1.0 - 2.0 * L.rho_c) * K);
}

inline double period(const EnergyLevel& L) { return 2.0 * std::numbers::pi / frequency(L); }

/// Closed-form orbit through the outer turning point at t = 0
/// (x = +x_max for G1+ and G2, x = -x_max for G1-). dn-type in a loop,
/// cn-type outside.
/// dn is rebuilt as sqrt(rho_c + rho cn^2): Boost 1.74 returns a visibly
/// wrong dn at u = K exactly, and the identity is cancellation-free.
inline OrbitPoint orbit_solution(const EnergyLevel& L, double t) {
  const double k = std::sqrt(L.rho);
  double cn = 0.0, dn = 0.0;
  auto fix_dn = [&] { dn = std::sqrt(L.rho_c + L.rho * cn * cn); };
  if (inside_loop(L.domain)) {
    const double lam = 1.0 / std::sqrt(1.0 + L.rho_c);
    const double xm = std::sqrt(2.0) * lam;
    const double sn = boost::math::jacobi_elliptic(k, lam * t, &cn, &dn);
    fix_dn();
    const double x = xm * dn;
    const double y = -xm * lam * L.rho * sn * cn;
    return L.domain == DomainTag::G1_PLUS ? OrbitPoint{x, y, t} : OrbitPoint{-x, -y, t};
  }
  const double w = 1.0 - 2.0 * L.rho_c;
  const double lam = 1.0 / std::sqrt(w);
  const double A = std::sqrt(2.0 * L.rho) * lam;
  const double sn = boost::math::jacobi_elliptic(k, lam * t, &cn, &dn);
  fix_dn();
  return {A * cn, -A * lam * sn * dn, t};
}

namespace detail {

// Integrate  g(x) * w(x) dtheta  over the half orbit y >= 0 using the
// substitution that removes the turning-point square roots.
//   mode 0: w = dx/y            (time)
//   mode 1: w = y dx            (area)
// x ranges over the positive-side orbit; the caller handles G1- mirroring.
template <class G>
double half_orbit_integral(const EnergyLevel& L, G&& g, int mode) {
  const auto tp = turning_points(L);
  const double r2 = std::numbers::sqrt2;
  quad::Options opt;
  if (inside_loop(L.domain)) {
    const double a = tp.x_min, b = tp.x_max;
    const double d = 0.5 * (b - a);
    // phi = th + pi/2, x - a = d (1 - cos phi) without cancellation
    auto f = [&](double phi) {
      const double s = std::sin(0.5 * phi);
      const double x = a + 2.0 * d * s * s;
      const double q = std::sqrt((x + b) * (x + a));
      if (mode == 0) return g(x) * r2 / q;
      const double ct = std::sin(phi);
      return g(x) * d * d * ct * ct * q / r2;
    };
    // Near the separatrix a -> 0 and the integrand peaks in a layer of width
    // ~ sqrt(a/d) at phi = 0; geometric breakpoints keep each piece smooth.
    std::vector<double> cuts{0.0};
    for (double w = 2.0 * std::sqrt(a / d); w < 0.5 * std::numbers::pi; w *= 4.0) cuts.push_back(w);
    cuts.push_back(std::numbers::pi);
    quad::Estimate sum;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += quad::estimate(f, cuts[i], cuts[i + 1], opt);
    return quad::accept(sum, opt);
  }
  const double b = tp.x_max, cc = tp.x_min;
  auto f = [&](double th) {
    const double x = b * std::sin(th);
    const double q = std::sqrt(x * x + cc * cc);
    if (mode == 0) return g(x) * r2 / q;
    const double ct = std::cos(th);
    return g(x) * b * b * ct * ct * q / r2;
  };
  return quad::integrate(f, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, opt);
}

template <class G>
auto mirrored(const EnergyLevel& L, G&& g) {
  const double s = L.domain == DomainTag::G1_MINUS ? -1.0 : 1.0;
  return [s, &g](double x) { return g(s * x); };
}

}  // namespace detail

/// Period by quadrature of the closed orbit, T = oint dx / y. Independent of
/// the elliptic closed forms.
inline double period_quadrature(const EnergyLevel& L) {
  return 2.0 * detail::half_orbit_integral(L, [](double) { return 1.0; }, 0);
}

/// Action I = (1/2pi) oint y dx.
inline double action(const EnergyLevel& L) {
  return detail::half_orbit_integral(L, [](double) { return 1.0; }, 1) / std::numbers::pi;
}

/// (1/2pi) oint g(x) y dx over the orbit, in the direction of motion.
template <class G>
double loop_integral(const EnergyLevel& L, G&& g) {
  return detail::half_orbit_integral(L, detail::mirrored(L, g), 1) / std::numbers::pi;
}

/// Time average of g(x) over one period.
template <class G>
double time_average(const EnergyLevel& L, G&& g) {
  auto gm = detail::mirrored(L, g);
  const double num = detail::half_orbit_integral(L, gm, 0);
  const double den = detail::half_orbit_integral(L, [](double) { return 1.0; }, 0);
  return num / den;
}

/// b = d omega / dI from fourth-order centred differences in rho_c of the
/// closed-form frequency and the quadrature action. Serves as the oracle for
/// the closed-form resonance coefficients.
inline double domega_dI(const EnergyLevel& L) {
  const double hi = inside_loop(L.domain) ? 1.0 : 0.5;
  const double room = std::min(L.rho_c, hi - L.rho_c);
  const double d = std::min(1e-3, 1e-2 * room);
  if (!(d > 1e-13)) throw StepUnderflow("domega_dI: level too close to an endpoint");
  auto w = [&](double rc) { return frequency(level_from_rho_c(rc, L.domain)); };
  auto I = [&](double rc) { return action(level_from_rho_c(rc, L.domain)); };
  auto diff = [&](auto&& f) {
    const double r = L.rho_c;
    return (f(r - 2 * d) - 8 * f(r - d) + 8 * f(r + d) - f(r + 2 * d)) / (12 * d);
  };
  return diff(w) / diff(I);
}

}  // namespace dvdp
