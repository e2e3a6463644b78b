#pragma once

// Complete elliptic integrals of the first and second kind, parameter
// convention (m = k^2), computed by the arithmetic-geometric mean.
//
// Every routine also has a "_c" twin taking the complementary parameter
// mc = 1 - m. Close to m = 1 the complement carries all the information and
// cannot be recovered from m itself, so callers that know mc should use it.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dvdp/errors.hpp"

namespace dvdp::elliptic {

namespace detail {

struct AgmResult {
  double mean;      // AGM(1, sqrt(mc))
  double e_over_k;  // E/K
};

// Gauss' AGM with the c_n bookkeeping needed for E:
//   E/K = 1 - sum_{n>=0} 2^{n-1} c_n^2,  c_0^2 = m.
inline AgmResult agm(double m, double mc) {
  double a = 1.0;
  double b = std::sqrt(mc);
  double sum = 0.5 * m;
  double pow2 = 0.5;
  for (int it = 0; it < 64; ++it) {
    const double c = 0.5 * (a - b);
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    pow2 *= 2.0;
    sum += pow2 * c * c;
    a = an;
    b = bn;
    if (std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * a) break;
  }
  return {0.5 * (a + b), 1.0 - sum};
}

}  // namespace detail

/// K as a function of the complementary parameter mc = 1 - m, mc in (0, 1].
inline double complete_K_c(double mc) {
  if (!(mc > 0.0) || mc > 1.0) throw DomainError("complete_K: complementary parameter outside (0,1]");
  return std::numbers::pi / (2.0 * detail::agm(1.0 - mc, mc).mean);
}

/// E as a function of the complementary parameter, mc in [0, 1].
inline double complete_E_c(double mc) {
  if (!(mc >= 0.0) || mc > 1.0) throw DomainError("complete_E: complementary parameter outside [0,1]");
  if (mc == 0.0) return 1.0;
  const auto r = detail::agm(1.0 - mc, mc);
  return std::numbers::pi / (2.0 * r.mean) * r.e_over_k;
}

/// K(m), 0 <= m < 1.
inline double complete_K(double m) {
  if (!(m >= 0.0) || m >= 1.0) throw DomainError("complete_K: parameter outside [0,1)");
  return complete_K_c(1.0 - m);
}

/// E(m), 0 <= m <= 1.
inline double complete_E(double m) {
  if (!(m >= 0.0) || m > 1.0) throw DomainError("complete_E: parameter outside [0,1]");
  return complete_E_c(1.0 - m);
}

/// Both integrals from one AGM run; m and mc must satisfy m + mc = 1.
struct KE {
  double K;
  double E;
};

inline KE complete_KE_c(double mc) {
  if (!(mc > 0.0) || mc > 1.0) throw DomainError("complete_KE: complementary parameter outside (0,1]");
  const auto r = detail::agm(1.0 - mc, mc);
  const double K = std::numbers::pi / (2.0 * r.mean);
  return {K, K * r.e_over_k};
}

/// Nome q = exp(-pi K(1-m) / K(m)), the geometric ratio of the Jacobi
/// function Fourier series of parameter m.
inline double nome_ratio_c(double m, double mc) {
  if (!(m > 0.0) || !(mc > 0.0) || m >= 1.0 || mc >= 1.0)
    throw DomainError("nome_ratio: parameter outside (0,1)");
  return std::exp(-std::numbers::pi * complete_K_c(m) / complete_K_c(mc));
}

inline double nome_ratio(double m) { return nome_ratio_c(m, 1.0 - m); }

/// dK/dm and dE/dm. Uses the Maclaurin series below m = 1e-3 where the
/// closed forms cancel catastrophically.
inline double dK_dm_c(double m, double mc) {
  if (m < 1e-3) {
    // K = pi/2 (1 + m/4 + 9m^2/64 + 25m^3/256 + 1225 m^4/16384 + ...)
    const double pi2 = std::numbers::pi / 2.0;
    return pi2 * (0.25 + 2.0 * 9.0 / 64.0 * m + 3.0 * 25.0 / 256.0 * m * m +
                  4.0 * 1225.0 / 16384.0 * m * m * m);
  }
  const auto ke = complete_KE_c(mc);
  return (ke.E - mc * ke.K) / (2.0 * m * mc);
}

inline double dE_dm_c(double m, double mc) {
  if (m < 1e-3) {
    // E = pi/2 (1 - m/4 - 3m^2/64 - 5m^3/256 - 175 m^4/16384 - ...)
    const double pi2 = std::numbers::pi / 2.0;
    return pi2 * (-0.25 - 2.0 * 3.0 / 64.0 * m - 3.0 * 5.0 / 256.0 * m * m -
                  4.0 * 175.0 / 16384.0 * m * m * m);
  }
  const auto ke = complete_KE_c(mc);
  return (ke.E - ke.K) / (2.0 * m);
}

/// Maclaurin coefficients: K(m) = sum k[n] m^n, E(m) = sum e[n] m^n.
struct Series {
  std::vector<double> k;
  std::vector<double> e;
};

inline Series maclaurin(int terms) {
  Series s;
  s.k.resize(static_cast<std::size_t>(terms));
  s.e.resize(static_cast<std::size_t>(terms));
  double c = 1.0;  // ((2n)! / (4^n n!^2))
  for (int n = 0; n < terms; ++n) {
    if (n > 0) c *= (2.0 * n - 1.0) / (2.0 * n);
    const double c2 = c * c;
    s.k[static_cast<std::size_t>(n)] = std::numbers::pi / 2.0 * c2;
    s.e[static_cast<std::size_t>(n)] = std::numbers::pi / 2.0 * c2 / (1.0 - 2.0 * n);
  }
  return s;
}

}  // namespace dvdp::elliptic
