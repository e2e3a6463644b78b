#pragma once

// Limit cycles of the autonomous equation (p3 = 0) from the zeros of the
// Poincare-Pontryagin functions, and the structure of the (p1,p2) plane.
//
// Inside a loop the bracketed part is linear in the parameters,
//   B10(rho) = p1 F(rho) + G(rho) +- p2 H(rho),
// and outside the figure-eight
//   B20(rho) = p1 F2(rho) + G2(rho).
// F and G both vanish like rho^2 at rho = 0 (the K and E terms cancel), so
// the scanner works with B10 / rho^2 and switches to the Maclaurin series of
// K and E below rho = 1/4.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "dvdp/elliptic.hpp"
#include "dvdp/errors.hpp"
#include "dvdp/geometry.hpp"

namespace dvdp::autonomous {

/// Coefficient of p2 in the loop functions at rho = 1 (and of the L2 lines).
inline constexpr double kH = 15.0 * std::numbers::sqrt2 * std::numbers::pi / 16.0;

struct Parts {
  double F = 0.0, G = 0.0, H = 0.0;
  double value(double p1, double p2, int sign) const { return p1 * F + G + sign * p2 * H; }
};

struct PartsD {
  Parts v;  // parts
  Parts d;  // their rho-derivatives
};

namespace detail {

inline constexpr int kTerms = 64;
inline constexpr double kSeriesCut = 0.25;

struct SeriesTable {
  std::array<double, kTerms> f{}, g{};
};

inline const SeriesTable& series_table() {
  static const SeriesTable t = [] {
    const auto s = elliptic::maclaurin(kTerms);
    auto conv = [&](std::array<double, 3> pk, std::array<double, 3> pe) {
      std::array<double, kTerms> c{};
      for (int n = 0; n < kTerms; ++n)
        for (int j = 0; j < 3 && j <= n; ++j)
          c[n] += pk[j] * s.k[n - j] + pe[j] * s.e[n - j];
      return c;
    };
    SeriesTable out;
    out.f = conv({-20.0, 30.0, -10.0}, {20.0, -20.0, 5.0});
    out.g = conv({4.0, -6.0, 2.0}, {-4.0, 4.0, -4.0});
    return out;
  }();
  return t;
}

// sum_{n>=2} c_n rho^(n-2) and its derivative.
inline std::pair<double, double> shifted_series(const std::array<double, kTerms>& c, double r) {
  double v = 0.0, d = 0.0;
  for (int n = kTerms - 1; n >= 2; --n) {
    d = d * r + v;
    v = v * r + c[n];
  }
  return {v, d};
}

}  // namespace detail

/// Loop parts divided by rho^2, with derivatives of the scaled quantities.
/// rho_c = 1 - rho is used for all near-separatrix work; rho_c = 0 returns
/// the separatrix limit (derivative entries are then meaningless).
inline PartsD loop_parts_scaled(double rho_c) {
  if (!(rho_c >= 0.0 && rho_c <= 1.0)) throw DomainError("loop parts: rho outside [0,1]");
  const double rho = 1.0 - rho_c;
  PartsD out;
  const double sq = std::sqrt(1.0 + rho_c);  // sqrt(2 - rho)
  out.v.H = kH * sq;
  out.d.H = -kH / (2.0 * sq);
  if (rho_c == 0.0) {
    out.v.F = 5.0;
    out.v.G = -4.0;
    return out;
  }
  if (rho <= detail::kSeriesCut) {
    const auto& t = detail::series_table();
    const auto [fv, fd] = detail::shifted_series(t.f, rho);
    const auto [gv, gd] = detail::shifted_series(t.g, rho);
    out.v.F = fv;
    out.d.F = fd;
    out.v.G = gv;
    out.d.G = gd;
    return out;
  }
  const auto ke = elliptic::complete_KE_c(rho_c);
  const double K = ke.K, E = ke.E;
  const double a = 1.0 + rho_c;     // 2 - rho
  const double q = -rho_c * a;      // (rho-1)(2-rho)
  const double dq = 1.0 + 2.0 * rho_c;
  const double qK = -a * (E - rho_c * K) / (2.0 * rho);  // q * dK/drho
  const double dE = (E - K) / (2.0 * rho);
  const double w = 1.0 - rho * rho_c;  // rho^2 - rho + 1

  const double F = 10.0 * q * K + 5.0 * a * a * E;
  const double G = -2.0 * q * K - 4.0 * w * E;
  const double dF = 10.0 * (dq * K + qK) + 5.0 * (-2.0 * a * E + a * a * dE);
  const double dG = -2.0 * (dq * K + qK) - 4.0 * ((2.0 * rho - 1.0) * E + w * dE);

  const double r2 = rho * rho;
  out.v.F = F / r2;
  out.v.G = G / r2;
  out.d.F = dF / r2 - 2.0 * F / (r2 * rho);
  out.d.G = dG / r2 - 2.0 * G / (r2 * rho);
  return out;
}

/// Exterior parts (H = 0). rho_c in (0, 1/2]; rho_c = 0 gives the limit.
inline PartsD exterior_parts(double rho_c) {
  if (!(rho_c >= 0.0 && rho_c <= 0.5)) throw DomainError("exterior parts: rho outside [1/2,1]");
  PartsD out;
  if (rho_c == 0.0) {
    out.v.F = 5.0;
    out.v.G = -4.0;
    return out;
  }
  const double rho = 1.0 - rho_c;
  const auto ke = elliptic::complete_KE_c(rho_c);
  const double K = ke.K, E = ke.E;
  const double a = 1.0 + rho_c;
  const double q = -rho_c * a;
  const double dq = 1.0 + 2.0 * rho_c;
  const double qK = -a * (E - rho_c * K) / (2.0 * rho);
  const double dE = (E - K) / (2.0 * rho);
  const double w = 1.0 - rho * rho_c;
  const double s = 2.0 * rho - 1.0;
  const double sK = s * (E - rho_c * K) / (2.0 * rho);  // s rho_c dK/drho

  out.v.F = 5.0 * s * rho_c * K + 5.0 * s * s * E;
  out.v.G = -2.0 * q * K - 4.0 * w * E;
  out.d.F = 5.0 * (2.0 * rho_c * K - s * K + sK) + 5.0 * (4.0 * s * E + s * s * dE);
  out.d.G = -2.0 * (dq * K + qK) - 4.0 * (s * E + w * dE);
  return out;
}

/// Bracketed loop function B10+- (no prefactor). sign = +1 right loop.
inline double B10(double rho, double p1, double p2, int sign) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("B1: rho outside (0,1)");
  return rho * rho * loop_parts_scaled(1.0 - rho).v.value(p1, p2, sign);
}

/// Loop generating function with its positive prefactor; equals
/// (1/2pi) oint (p1 + p2 x - x^2) y dx over the loop orbit.
inline double B1(double rho, double p1, double p2, int sign) {
  const double a = 2.0 - rho;
  return 4.0 / (30.0 * std::numbers::pi * std::pow(a, 2.5)) * B10(rho, p1, p2, sign);
}

inline double B20(double rho, double p1) {
  if (!(rho > 0.5 && rho < 1.0)) throw DomainError("B2: rho outside (1/2,1)");
  return exterior_parts(1.0 - rho).v.value(p1, 0.0, 0);
}

inline double B2(double rho, double p1) {
  const double s = 2.0 * rho - 1.0;
  return 8.0 / (30.0 * std::numbers::pi * std::pow(s, 2.5)) * B20(rho, p1);
}

/// Signed generating function at a level, prefactor included, using rho_c.
inline double B_level(const EnergyLevel& L, double p1, double p2) {
  const double rc = L.rho_c;
  if (inside_loop(L.domain)) {
    const int sg = L.domain == DomainTag::G1_PLUS ? 1 : -1;
    const double rho = L.rho;
    const double b10 = rho * rho * loop_parts_scaled(rc).v.value(p1, p2, sg);
    return 4.0 / (30.0 * std::numbers::pi * std::pow(1.0 + rc, 2.5)) * b10;
  }
  const double s = 1.0 - 2.0 * rc;
  return 8.0 / (30.0 * std::numbers::pi * std::pow(s, 2.5)) *
         exterior_parts(rc).v.value(p1, 0.0, 0);
}

// ---------------------------------------------------------------- census

struct Cycle {
  DomainTag domain;
  double rho;
  bool double_root;
  bool stable;  // from the sign of dB/dI at the root; a double root is semi-stable
};

struct CycleCensus {
  int i = 0, j = 0, k = 0;
  std::vector<Cycle> cycles;
  bool near_separatrix = false;  // some root closer than 1e-4 to rho = 1

  std::array<int, 3> type() const { return {i, j, k}; }
};

inline bool within_cycle_bounds(const std::array<int, 3>& t) {
  return t[0] <= 2 && t[1] <= 2 && t[2] <= 2 && t[0] + t[1] + t[2] <= 3;
}

/// Sign scanner over precomputed rho grids. The parts do not depend on the
/// parameters, so one scanner serves any number of (p1,p2) queries.
class CensusScanner {
 public:
  explicit CensusScanner(int n_uniform = 2000) {
    auto add_grid = [&](std::vector<Node>& g, double lo_c, double hi_c, bool loop) {
      // rho_c decreasing from hi_c to lo_c, i.e. rho increasing
      std::vector<double> rcs;
      rcs.push_back(hi_c);
      const double r1 = 1.0 - 1e-6;
      const double start = loop ? 1e-6 : 0.5 + 1e-6;
      for (int n = 0; n < n_uniform; ++n)
        rcs.push_back(1.0 - (start + (r1 - start) * n / (n_uniform - 1)));
      // geometric refinement towards the separatrix
      for (int n = 1; n <= 120; ++n) rcs.push_back(1e-6 * std::pow(10.0, -8.0 * n / 120.0));
      rcs.push_back(lo_c);
      std::sort(rcs.begin(), rcs.end(), std::greater<>());
      rcs.erase(std::unique(rcs.begin(), rcs.end()), rcs.end());
      for (double rc : rcs) {
        Node nd;
        nd.rho_c = rc;
        nd.p = loop ? loop_parts_scaled(rc) : exterior_parts(rc);
        g.push_back(nd);
      }
    };
    add_grid(g1_, 0.0, 1.0, true);
    add_grid(g2_, 0.0, 0.5, false);
  }

  /// Counts only (fast path for large random samples).
  std::array<int, 3> count(double p1, double p2) const {
    return {scan(g1_, p1, p2, 1, true, nullptr), scan(g1_, p1, p2, -1, true, nullptr),
            scan(g2_, p1, 0.0, 0, false, nullptr)};
  }

  /// Full census with polished roots and stability.
  CycleCensus census(double p1, double p2) const {
    CycleCensus c;
    std::vector<Cycle> cy;
    c.i = scan(g1_, p1, p2, 1, true, &cy, DomainTag::G1_PLUS);
    c.j = scan(g1_, p1, p2, -1, true, &cy, DomainTag::G1_MINUS);
    c.k = scan(g2_, p1, 0.0, 0, false, &cy, DomainTag::G2);
    c.cycles = std::move(cy);
    for (const auto& x : c.cycles)
      if (x.rho > 1.0 - 1e-4) c.near_separatrix = true;
    return c;
  }

 private:
  struct Node {
    double rho_c;
    PartsD p;
  };
  std::vector<Node> g1_, g2_;

  static double eval(double rc, double p1, double p2, int sign, bool loop) {
    const auto P = loop ? loop_parts_scaled(rc) : exterior_parts(rc);
    return P.v.value(p1, p2, sign);
  }
  static double eval_d(double rc, double p1, double p2, int sign, bool loop) {
    const auto P = loop ? loop_parts_scaled(rc) : exterior_parts(rc);
    return P.d.value(p1, p2, sign);
  }

  static int scan(const std::vector<Node>& g, double p1, double p2, int sign, bool loop,
                  std::vector<Cycle>* out, DomainTag dom = DomainTag::G1_PLUS) {
    const std::size_t n = g.size();
    std::vector<double> v(n);
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = g[i].p.v.value(p1, p2, sign);
      vmax = std::max(vmax, std::abs(v[i]));
    }
    auto f = [&](double rc) { return eval(rc, p1, p2, sign, loop); };
    int roots = 0;
    auto record = [&](double rc, bool dbl) {
      if (!out) return;
      const double d = eval_d(rc, p1, p2, sign, loop);
      // I increases with rho inside the loops and decreases with rho outside
      const double dBdI_sign = loop ? d : -d;
      out->push_back({dom, 1.0 - rc, dbl, !dbl && dBdI_sign < 0.0});
    };
    auto polish = [&](double a, double b) {
      if (!out) return 0.5 * (a + b);
      std::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve(
          f, a, b, boost::math::tools::eps_tolerance<double>(50), it);
      return 0.5 * (r.first + r.second);
    };

    // sign changes between consecutive non-zero samples
    std::size_t last = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0.0) continue;
      if (last != n && (v[last] > 0) != (v[i] > 0)) {
        ++roots;
        if (out) {
          double a = g[i].rho_c, b = g[last].rho_c;
          record(polish(a, b), false);
        }
      }
      last = i;
    }

    // sign-preserving local extrema of |v|: hidden pairs or double roots
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double a = v[i - 1], b = v[i], c = v[i + 1];
      if (b == 0.0 || (a > 0) != (b > 0) || (c > 0) != (b > 0)) continue;
      if (!(std::abs(b) < std::abs(a) && std::abs(b) <= std::abs(c))) continue;
      const double curv = std::abs(a - 2.0 * b + c);
      if (std::abs(b) > 2.0 * curv + 1e-12 * vmax) continue;
      const double s = b > 0 ? 1.0 : -1.0;
      auto sf = [&](double rc) { return s * f(rc); };
      const double lo = g[i + 1].rho_c, hi = g[i - 1].rho_c;
      const auto m = boost::math::tools::brent_find_minima(sf, lo, hi, 52);
      const double scale = std::max(1.0, vmax);
      if (m.second < -1e-12 * scale) {
        roots += 2;
        if (out) {
          record(polish(m.first, hi), false);
          record(polish(lo, m.first), false);
        }
      } else if (m.second <= 1e-12 * scale) {
        roots += 1;
        record(m.first, true);
      }
    }
    if (out) {
      std::sort(out->begin(), out->end(), [](const Cycle& x, const Cycle& y) {
        return x.domain != y.domain ? x.domain < y.domain : x.rho < y.rho;
      });
    }
    return roots;
  }
};

inline const CensusScanner& default_scanner() {
  static const CensusScanner s;
  return s;
}

inline CycleCensus find_cycles(double p1, double p2) { return default_scanner().census(p1, p2); }

/// Brute-force oracle: straight sign scan of the three unscaled functions on
/// a uniform grid, direct elliptic evaluation, no refinement, no endpoint
/// limits. Independent of the scanner's grid, scaling and series route.
inline std::array<int, 3> brute_force_census(double p1, double p2, int n = 10000) {
  auto count = [&](auto&& fn, double lo, double hi) {
    int c = 0;
    double prev = 0.0;
    bool have = false;
    for (int i = 0; i < n; ++i) {
      const double r = lo + (hi - lo) * i / (n - 1);
      const double v = fn(r);
      if (v == 0.0) continue;
      if (have && (prev > 0) != (v > 0)) ++c;
      prev = v;
      have = true;
    }
    return c;
  };
  auto b10 = [&](int s) {
    return [=](double r) {
      const double K = elliptic::complete_K(r), E = elliptic::complete_E(r);
      return p1 * (10 * (r - 1) * (2 - r) * K + 5 * (2 - r) * (2 - r) * E) +
             (-2 * (r - 1) * (2 - r) * K - 4 * (r * r - r + 1) * E) +
             s * p2 * kH * r * r * std::sqrt(2 - r);
    };
  };
  auto b20 = [&](double r) {
    const double K = elliptic::complete_K(r), E = elliptic::complete_E(r);
    return p1 * (5 * (2 * r - 1) * (1 - r) * K + 5 * (2 * r - 1) * (2 * r - 1) * E) +
           (-2 * (r - 1) * (2 - r) * K - 4 * (r * r - r + 1) * E);
  };
  return {count(b10(1), 1e-3, 1 - 1e-9), count(b10(-1), 1e-3, 1 - 1e-9),
          count(b20, 0.5 + 1e-9, 1 - 1e-9)};
}

// ------------------------------------------------------ parameter plane

struct L3Point {
  double p1;
  double rho;
  double residual_B;   // |B20| at the point
  double residual_dB;  // |dB20/drho| at the point
};

/// Fold of the exterior cycles: the extremum over rho of p1 = -G2/F2.
inline L3Point l3_point() {
  auto P = [](double rc) {
    const auto e = exterior_parts(rc);
    return -e.v.G / e.v.F;
  };
  const auto m = boost::math::tools::brent_find_minima(P, 1e-6, 0.45, 52);
  const double rc = m.first;
  const double p1 = m.second;
  const auto e = exterior_parts(rc);
  return {p1, 1.0 - rc, std::abs(e.v.value(p1, 0, 0)), std::abs(e.d.value(p1, 0, 0))};
}

struct CurvePoint {
  double rho;
  double p1;
  double p2;
};

/// Point of the double-cycle curve in the right loop: B10+ = dB10+/drho = 0.
inline CurvePoint double_cycle_point(double rho_c) {
  const auto P = loop_parts_scaled(rho_c);
  // [F H; F' H'] (p1, p2) = -(G, G')
  const double a = P.v.F, b = P.v.H, c = P.d.F, d = P.d.H;
  const double det = a * d - b * c;
  if (!std::isfinite(det) || std::abs(det) < 1e-300) throw TraceStall("double-cycle system singular");
  const double r1 = -P.v.G, r2 = -P.d.G;
  return {1.0 - rho_c, (r1 * d - b * r2) / det, (a * r2 - c * r1) / det};
}

namespace detail {
// Neville extrapolation of samples (x_i, y_i) to x = 0.
inline double neville0(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i)
      y[i] = (x[i + m] * y[i] - x[i] * y[i + 1]) / (x[i + m] - x[i]);
  return y[0];
}
}  // namespace detail

/// rho -> 0 end of the double-cycle curve by Richardson extrapolation in rho.
inline std::pair<double, double> double_cycle_endpoint_focus() {
  std::vector<double> xs, a, b;
  for (int j = 0; j < 7; ++j) {
    const double r = 0.04 / std::pow(2.0, j);
    const auto p = double_cycle_point(1.0 - r);
    xs.push_back(r);
    a.push_back(p.p1);
    b.push_back(p.p2);
  }
  return {detail::neville0(xs, a), detail::neville0(xs, b)};
}

/// rho -> 1 end. The curve approaches the separatrix like 1/K(rho), so we
/// extrapolate in u = 1/K.
inline std::pair<double, double> double_cycle_endpoint_separatrix() {
  std::vector<double> us, a, b;
  for (int j = 0; j < 6; ++j) {
    const double rc = std::pow(10.0, -6.0 - 2.0 * j);
    const auto p = double_cycle_point(rc);
    us.push_back(1.0 / elliptic::complete_K_c(rc));
    a.push_back(p.p1);
    b.push_back(p.p2);
  }
  return {detail::neville0(us, a), detail::neville0(us, b)};
}

/// Exact limits, for comparison with the extrapolated ones.
inline std::pair<double, double> focus_limit_exact() { return {-1.0 / 3.0, 4.0 / 3.0}; }
inline std::pair<double, double> separatrix_limit_exact() { return {0.0, 4.0 / kH}; }

struct BifurcationLine {
  std::string name;
  bool analytic = false;
  // analytic lines: a p1 + b p2 + c = 0
  double a = 0.0, b = 0.0, c = 0.0;
  std::vector<std::pair<double, double>> polyline;  // (p1, p2)

  double residual(double p1, double p2) const { return a * p1 + b * p2 + c; }
};

/// L1+-, L2+-, L3 and the double-cycle curve of the right loop (the left one
/// is its mirror p2 -> -p2). L4 is numeric and lives in the flow module.
inline std::vector<BifurcationLine> bifurcation_lines(double p1_lo = -1.5, double p1_hi = 2.5,
                                                      int curve_points = 400) {
  std::vector<BifurcationLine> out;
  auto line = [&](std::string name, double a, double b, double c) {
    BifurcationLine L{std::move(name), true, a, b, c, {}};
    if (b != 0.0) {
      for (double p1 : {p1_lo, p1_hi}) L.polyline.push_back({p1, -(a * p1 + c) / b});
    } else {
      L.polyline = {{-c / a, -3.0}, {-c / a, 3.0}};
    }
    out.push_back(std::move(L));
  };
  // foci +-1 change stability: p1 +- p2 - 1 = 0 (right loop takes +)
  line("L1+", 1.0, 1.0, -1.0);
  line("L1-", 1.0, -1.0, -1.0);
  // a cycle hits the figure-eight: 5 p1 +- kH p2 - 4 = 0
  line("L2+", 5.0, kH, -4.0);
  line("L2-", 5.0, -kH, -4.0);
  const auto l3 = l3_point();
  line("L3", 1.0, 0.0, -l3.p1);

  BifurcationLine dc{"DoubleCycleG1", false, 0, 0, 0, {}};
  const auto e0 = double_cycle_endpoint_focus();
  dc.polyline.push_back(e0);
  for (int n = 1; n < curve_points; ++n) {
    // cluster points at both ends: rho = sin^2 spacing, then logarithmic tail
    const double u = static_cast<double>(n) / curve_points;
    const double rho = std::pow(std::sin(0.5 * std::numbers::pi * u), 2);
    const auto p = double_cycle_point(1.0 - rho);
    dc.polyline.push_back({p.p1, p.p2});
  }
  for (int j = 0; j <= 12; ++j) {
    const auto p = double_cycle_point(std::pow(10.0, -4.0 - j));
    dc.polyline.push_back({p.p1, p.p2});
  }
  dc.polyline.push_back(double_cycle_endpoint_separatrix());
  out.push_back(std::move(dc));
  return out;
}

// ---------------------------------------------------------- domain probes

using CensusType = std::array<int, 3>;

/// Reference (i,j,k) types of the upper half-plane domains D1..D13.
inline const std::array<CensusType, 13>& reference_domain_types() {
  static const std::array<CensusType, 13> t{{{0, 0, 0},
                                             {0, 0, 2},
                                             {0, 0, 1},
                                             {0, 1, 1},
                                             {0, 0, 1},
                                             {1, 1, 1},
                                             {1, 0, 1},
                                             {1, 0, 2},
                                             {0, 0, 2},
                                             {0, 0, 0},
                                             {1, 0, 0},
                                             {2, 0, 0},
                                             {1, 0, 0}}};
  return t;
}

/// Crossing of L1+ and L2+, where the right-loop band pinches.
inline std::pair<double, double> l1_l2_crossing() {
  const double p2 = 1.0 / (5.0 - kH);
  return {1.0 - p2, p2};
}

/// Domain number for a point of known type. Types that occur twice in the
/// upper half-plane are told apart by the analytic line separating them;
/// the numbering of such pairs is a convention (dissipation region = D10).
inline int domain_label(const CensusType& t, double p1, double p2) {
  auto is = [&](int a, int b, int c) { return t == CensusType{a, b, c}; };
  if (is(0, 0, 0)) return p1 + p2 - 1.0 > 0.0 ? 1 : 10;
  if (is(0, 0, 2)) return 5.0 * p1 + kH * p2 - 4.0 > 0.0 ? 2 : 9;
  if (is(0, 0, 1)) return 5.0 * p1 - kH * p2 - 4.0 < 0.0 ? 3 : 5;
  if (is(1, 0, 0)) return p2 > l1_l2_crossing().second ? 13 : 11;
  if (is(0, 1, 1)) return 4;
  if (is(1, 1, 1)) return 6;
  if (is(1, 0, 1)) return 7;
  if (is(1, 0, 2)) return 8;
  if (is(2, 0, 0)) return 12;
  return 0;
}

struct DomainProbe {
  int index = 0;  // 1..13
  double p1 = 0.0, p2 = 0.0;
  CensusType type{};
  double margin = 0.0;  // distance to the nearest differently-typed grid cell
};

struct ProbeWindow {
  double p1_lo, p1_hi, p2_lo, p2_hi, step;
};

namespace detail {

struct Component {
  CensusType type;
  int label;
  double p1, p2, margin;
};

// Connected regions of equal (census type, domain label) on a grid, each
// reported with its most interior cell: largest Chebyshev distance to a cell
// of another region or to the window edge. Splitting by label as well as by
// type keeps the two (0,0,0) regions apart where they touch at the pinch.
inline std::vector<Component> grid_components(const CensusScanner& S, const ProbeWindow& w) {
  const int nx = static_cast<int>(std::floor((w.p1_hi - w.p1_lo) / w.step)) + 1;
  const int ny = static_cast<int>(std::floor((w.p2_hi - w.p2_lo) / w.step)) + 1;
  auto at = [&](int ix, int iy) { return static_cast<std::size_t>(iy) * nx + ix; };
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  std::vector<CensusType> type(n);
  std::vector<int> label(n);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double p1 = w.p1_lo + ix * w.step, p2 = w.p2_lo + iy * w.step;
      type[at(ix, iy)] = S.count(p1, p2);
      label[at(ix, iy)] = domain_label(type[at(ix, iy)], p1, p2);
    }
  auto same = [&](std::size_t a, std::size_t b) { return label[a] == label[b] && type[a] == type[b]; };

  std::vector<int> dist(n, -1);
  std::vector<std::size_t> q;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      bool edge = ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1;
      for (int dy = -1; dy <= 1 && !edge; ++dy)
        for (int dx = -1; dx <= 1 && !edge; ++dx)
          if (!same(at(ix + dx, iy + dy), at(ix, iy))) edge = true;
      if (edge) {
        dist[at(ix, iy)] = 0;
        q.push_back(at(ix, iy));
      }
    }
  for (std::size_t h = 0; h < q.size(); ++h) {
    const int ix = static_cast<int>(q[h] % nx), iy = static_cast<int>(q[h] / nx);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
        if (dist[at(jx, jy)] < 0) {
          dist[at(jx, jy)] = dist[q[h]] + 1;
          q.push_back(at(jx, jy));
        }
      }
  }

  std::vector<int> comp(n, -1);
  std::vector<Component> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(out.size());
    std::size_t best = s;
    std::vector<std::size_t> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      if (dist[c] > dist[best]) best = c;
      const int ix = static_cast<int>(c % nx), iy = static_cast<int>(c / nx);
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& d : nb) {
        const int jx = ix + d[0], jy = iy + d[1];
        if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
        const std::size_t j = at(jx, jy);
        if (comp[j] < 0 && same(j, s)) {
          comp[j] = id;
          stack.push_back(j);
        }
      }
    }
    const int bx = static_cast<int>(best % nx), by = static_cast<int>(best / nx);
    out.push_back({type[s], label[s], w.p1_lo + bx * w.step, w.p2_lo + by * w.step,
                   dist[best] * w.step});
  }
  return out;
}

}  // namespace detail

/// Windows searched for probes: a coarse view of the upper half-plane plus
/// finer windows where domains are thin (the strip between L3 and p1 = 0.8,
/// both below and above L2+, and the double-cycle wedge near the L1+/L2+
/// crossing).
inline std::vector<ProbeWindow> default_probe_windows() {
  const auto [c1, c2] = l1_l2_crossing();
  const double l3 = l3_point().p1;
  return {{-1.5, 2.0, 0.01, 2.5, 0.02},
          {l3 - 0.01, 0.81, 0.0005, 0.07, 0.001},
          {l3 - 0.01, 0.81, 0.2, 0.6, 0.002},
          {c1 - 0.1, c1 + 0.01, c2 - 0.005, c2 + 0.09, 0.0006}};
}

/// One certified probe point per domain D1..D13.
inline std::map<int, DomainProbe> locate_domain_samples(
    const std::vector<ProbeWindow>& windows = default_probe_windows()) {
  const auto& S = default_scanner();
  std::map<int, DomainProbe> best;
  for (const auto& w : windows)
    for (const auto& c : detail::grid_components(S, w)) {
      const int id = c.label;
      if (c.margin <= 0.0 || id == 0) continue;
      auto it = best.find(id);
      if (it == best.end() || c.margin > it->second.margin)
        best[id] = {id, c.p1, c.p2, c.type, c.margin};
    }
  const auto& ref = reference_domain_types();
  for (int id = 1; id <= 13; ++id) {
    auto it = best.find(id);
    if (it == best.end()) throw ProbeNotFound("no region found for D" + std::to_string(id));
    const auto& p = it->second;
    if (p.type != ref[id - 1] || brute_force_census(p.p1, p.p2) != p.type)
      throw ProbeNotFound("probe for D" + std::to_string(id) + " failed certification");
  }
  return best;
}

}  // namespace dvdp::autonomous
