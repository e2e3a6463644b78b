#pragma once

// First-order splitting of the figure-eight loops for the transformed system
//
//   xi'' - xi + xi^3 = eps [ (p1 + p2 xi - xi^2) xi' + 3 p3/(1+p4^2) xi^2 sin(p4 t) ],
//
// obtained from the original equation by x = xi + eps x1(t). Two versions of
// the distance function live here:
//   delta1()             the closed form (mean + a cos(p4 t0));
//   melnikov_quadrature() the integral of y0 G along the unperturbed loop,
//                         which is what the flow engine's energy-difference
//                         splitting converges to.
// They share the mean exactly; the cosine coefficients differ by the factor
// 3/(2 sqrt 2) and by sign convention (see the test suite).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dvdp/errors.hpp"
#include "dvdp/params.hpp"
#include "dvdp/quadrature.hpp"

namespace dvdp::melnikov {

inline constexpr double kLoopP2 = std::numbers::pi * std::numbers::sqrt2 / 8.0;

enum class Verdict { TRANSVERSAL, TANGENT, NO_INTERSECTION };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::TRANSVERSAL: return "TRANSVERSAL";
    case Verdict::TANGENT: return "TANGENT";
    case Verdict::NO_INTERSECTION: return "NO_INTERSECTION";
  }
  return "?";
}

struct MelnikovResult {
  double mean = 0.0;
  double amplitude = 0.0;  // coefficient of cos(p4 t0)
  Verdict verdict = Verdict::NO_INTERSECTION;

  double operator()(double t0, double p4) const { return mean + amplitude * std::cos(p4 * t0); }
  double max() const { return mean + std::abs(amplitude); }
  double min() const { return mean - std::abs(amplitude); }
};

inline Verdict verdict_of(double mean, double amplitude) {
  const double gap = std::abs(amplitude) - std::abs(mean);
  if (std::abs(gap) <= 1e-9 * std::max(1.0, std::abs(mean))) return Verdict::TANGENT;
  return gap > 0.0 ? Verdict::TRANSVERSAL : Verdict::NO_INTERSECTION;
}

inline double x1_correction(double t, double p3, double p4) {
  return -p3 / (1.0 + p4 * p4) * std::sin(p4 * t);
}

/// (2/3) p1 - 8/15 written so that it vanishes exactly at p1 = 0.8.
inline double p1_term(double p1) { return (10.0 * p1 - 8.0) / 15.0; }

/// The bracket (2/3)p1 +- (pi sqrt2/8) p2 - 8/15, + for the right loop.
inline double loop_bracket(double p1, double p2, LoopSide side) {
  return p1_term(p1) + sign_of(side) * kLoopP2 * p2;
}

inline double amplitude_coefficient(double p4) {
  return 3.0 * std::numbers::pi * p4 / (2.0 * std::cosh(0.5 * std::numbers::pi * p4));
}

inline MelnikovResult melnikov(const Params& P, LoopSide side) {
  MelnikovResult r;
  r.mean = 2.0 * loop_bracket(P.p1, P.p2, side);
  r.amplitude = amplitude_coefficient(P.p4) * P.p3;
  r.verdict = verdict_of(r.mean, r.amplitude);
  return r;
}

struct Delta1 {
  double value = 0.0;
  MelnikovResult result;
};

inline Delta1 delta1(double t0, const Params& P, LoopSide side) {
  const auto r = melnikov(P, side);
  return {r(t0, P.p4), r};
}

inline double threshold_p3_star(double p1, double p2, double p4, LoopSide side) {
  if (p4 == 0.0) throw DomainError("p3* needs p4 != 0");
  const double c = std::cosh(0.5 * std::numbers::pi * p4) / (std::numbers::pi * p4);
  return 4.0 / 3.0 * std::abs(loop_bracket(p1, p2, side) * c);
}

struct LeftLoop {
  double value = 0.0;
  MelnikovResult result;
  bool on_right_loop = true;  // false: the right-loop condition is violated
  double right_mean = 0.0;
};

/// Left-loop distance when p1 is tied to p2 by the right-loop condition.
inline LeftLoop left_loop_delta1(double t0, double p2, double p3, double p4, double p1 = NAN,
                                 double tol = 1e-5) {
  LeftLoop out;
  if (!std::isnan(p1)) {
    out.right_mean = 2.0 * loop_bracket(p1, p2, LoopSide::RIGHT);
    out.on_right_loop = std::abs(out.right_mean) <= tol;
  }
  out.result.mean = -std::numbers::pi * std::numbers::sqrt2 / 2.0 * p2;
  out.result.amplitude = amplitude_coefficient(p4) * p3;
  out.result.verdict = verdict_of(out.result.mean, out.result.amplitude);
  out.value = out.result(t0, p4);
  return out;
}

/// p3 at which the left-loop distance becomes tangent.
inline double left_loop_tangency_p3(double p2, double p4) {
  return std::numbers::pi * std::numbers::sqrt2 / 2.0 * std::abs(p2) / amplitude_coefficient(p4);
}

/// Melnikov integral of the transformed system by quadrature along
/// x0 = +-sqrt2 sech s, with H_u - H_s = eps M(t0) + O(eps^2) and the loop
/// passing its vertex at t = t0.
inline MelnikovResult melnikov_quadrature(const Params& P, LoopSide side) {
  const double sg = sign_of(side);
  const double L = 40.0;
  const double kf = 3.0 * P.p3 / (1.0 + P.p4 * P.p4);
  auto x0 = [&](double s) { return sg * std::numbers::sqrt2 / std::cosh(s); };
  auto y0 = [&](double s) { return -sg * std::numbers::sqrt2 * std::tanh(s) / std::cosh(s); };
  quad::Options opt;
  opt.accept = 1e-8;
  MelnikovResult r;
  r.mean = quad::integrate(
      [&](double s) {
        const double x = x0(s), y = y0(s);
        return (P.p1 + P.p2 * x - x * x) * y * y;
      },
      -L, L, opt);
  // forcing: y0 x0^2 sin(p4 (s + t0)); the sin(p4 t0) part integrates to zero
  r.amplitude = quad::integrate(
      [&](double s) {
        const double x = x0(s);
        return kf * y0(s) * x * x * std::sin(P.p4 * s);
      },
      -L, L, opt);
  r.verdict = verdict_of(r.mean, r.amplitude);
  return r;
}

// ---------------------------------------------------------------- lines

/// p3 = intercept + slope * p2 on [p2_lo, p2_hi], p3 >= 0 throughout.
struct TangencyLine {
  std::string label;
  std::vector<LoopSide> sides;  // two entries when both loops share the line
  double slope = 0.0;
  double intercept = 0.0;
  double p2_lo = 0.0;
  double p2_hi = 0.0;

  double p3(double p2) const { return intercept + slope * p2; }
};

/// Straight tangency lines of the analytic theory on p2 in [0, p2_max]:
/// for each loop the two branches of |bracket| that are nonnegative there.
/// eps does not enter at first order and is accepted for interface symmetry.
/// Labels: M at p1 = 0.78, N at 0.8, R at 0.82, T otherwise; the left-loop
/// branch is numbered first, then right-loop branches by increasing p2.
inline std::vector<TangencyLine> analytic_tangency_lines(double p1, double p4, double /*eps*/ = 0.0,
                                                         double p2_max = 3.0) {
  if (p4 == 0.0) throw DomainError("tangency lines need p4 != 0");
  const double k = 4.0 / 3.0 * std::cosh(0.5 * std::numbers::pi * p4) / (std::numbers::pi * p4);
  const double m0 = p1_term(p1);
  std::vector<TangencyLine> raw;
  for (LoopSide side : {LoopSide::LEFT, LoopSide::RIGHT}) {
    const double c = sign_of(side) * kLoopP2;  // bracket = m0 + c p2
    // branch +: p3 = k (m0 + c p2), branch -: p3 = -k (m0 + c p2)
    const double zero = c != 0.0 ? -m0 / c : INFINITY;
    for (double s : {1.0, -1.0}) {
      TangencyLine ln;
      ln.sides = {side};
      ln.slope = s * k * c;
      ln.intercept = s * k * m0;
      // interval where s (m0 + c p2) >= 0 intersected with [0, p2_max]
      double lo = 0.0, hi = p2_max;
      if (s * c > 0.0) lo = std::max(lo, zero);
      else hi = std::min(hi, zero);
      if (!(hi > lo)) continue;
      ln.p2_lo = lo;
      ln.p2_hi = hi;
      raw.push_back(ln);
    }
  }
  // merge coincident lines (exact in the coefficients)
  std::vector<TangencyLine> out;
  for (const auto& ln : raw) {
    bool merged = false;
    for (auto& o : out)
      if (o.slope == ln.slope && o.intercept == ln.intercept && o.p2_lo == ln.p2_lo && o.p2_hi == ln.p2_hi) {
        o.sides.push_back(ln.sides.front());
        merged = true;
      }
    if (!merged) out.push_back(ln);
  }
  std::stable_sort(out.begin(), out.end(), [](const TangencyLine& a, const TangencyLine& b) {
    const bool la = a.sides.front() == LoopSide::LEFT, lb = b.sides.front() == LoopSide::LEFT;
    if (la != lb) return la;
    return a.p2_lo < b.p2_lo;
  });
  const char fam = std::abs(p1 - 0.78) < 1e-12 ? 'M'
                   : std::abs(p1 - 0.8) < 1e-12 ? 'N'
                   : std::abs(p1 - 0.82) < 1e-12 ? 'R'
                                                 : 'T';
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = std::string(1, fam) + std::to_string(i + 1);
  return out;
}

}  // namespace dvdp::melnikov
