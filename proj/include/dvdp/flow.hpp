#pragma once

// Direct numerics for the forced equation in two forms:
//   ORIGINAL     x'' - x + x^3 = eps [ (p1 + p2 x - x^2) x' + p3 sin(p4 t) ]
//   TRANSFORMED  xi'' - xi + xi^3 = eps [ (p1 + p2 xi - xi^2) xi' + 3 p3/(1+p4^2) xi^2 sin(p4 t) ]
// The origin is an exact saddle of the transformed form for every t, which
// is what makes the phase-resolved splitting below clean.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "dvdp/errors.hpp"
#include "dvdp/geometry.hpp"
#include "dvdp/ode.hpp"
#include "dvdp/params.hpp"

namespace dvdp::flow {

using State = ode::State;

enum class Variant { ORIGINAL, TRANSFORMED };

inline const char* to_string(Variant v) { return v == Variant::ORIGINAL ? "original" : "transformed"; }

struct Rhs {
  Params P;
  Variant variant = Variant::TRANSFORMED;

  void operator()(const State& s, State& ds, double t) const {
    const double x = s[0], y = s[1];
    double f = (P.p1 + P.p2 * x - x * x) * y;
    if (P.p3 != 0.0) {
      const double sn = std::sin(P.p4 * t);
      f += variant == Variant::ORIGINAL ? P.p3 * sn : 3.0 * P.p3 / (1.0 + P.p4 * P.p4) * x * x * sn;
    }
    ds[0] = y;
    ds[1] = x - x * x * x + P.eps * f;
  }
};

/// Manifold-grade tolerances; sweeps may pass looser ones.
inline ode::Tolerances tight_tolerances() {
  ode::Tolerances t;
  t.abs = 1e-12;
  t.rel = 1e-12;
  return t;
}

inline State integrate(const State& s0, double t0, double t1, const Params& P, Variant v,
                       const ode::Tolerances& tol = tight_tolerances()) {
  return ode::integrate(Rhs{P, v}, s0, t0, t1, tol);
}

/// Same, recording every accepted step as (t, x, y).
inline State integrate_dense(const State& s0, double t0, double t1, const Params& P, Variant v,
                             std::vector<std::array<double, 3>>& out,
                             const ode::Tolerances& tol = tight_tolerances()) {
  return ode::integrate(Rhs{P, v}, s0, t0, t1, tol,
                        [&](double t, const State& s) { out.push_back({t, s[0], s[1]}); });
}

// ---------------------------------------------------------------- map

class StroboscopicMap {
 public:
  StroboscopicMap(const Params& P, Variant v, ode::Tolerances tol = tight_tolerances())
      : P_(P), v_(v), tol_(tol) {
    P_.validate();
    if (!(P_.p4 > 0.0)) throw DomainError("stroboscopic map needs p4 > 0");
    T_ = 2.0 * std::numbers::pi / P_.p4;
  }

  const Params& params() const { return P_; }
  Variant variant() const { return v_; }
  double period() const { return T_; }
  const ode::Tolerances& tolerances() const { return tol_; }

  /// Flow from t = phase to t = phase + T (phase 0 is the strobe).
  State forward(const State& s, double phase = 0.0) const {
    return ode::integrate(Rhs{P_, v_}, s, phase, phase + T_, tol_);
  }
  State backward(const State& s, double phase = 0.0) const {
    return ode::integrate(Rhs{P_, v_}, s, phase + T_, phase, tol_);
  }

 private:
  Params P_;
  Variant v_;
  ode::Tolerances tol_;
  double T_ = 0.0;
};

inline std::vector<State> poincare(const StroboscopicMap& M, State s, int n) {
  std::vector<State> out;
  out.reserve(n + 1);
  out.push_back(s);
  for (int i = 0; i < n; ++i) {
    s = M.forward(s);
    out.push_back(s);
  }
  return out;
}

struct SaddleFixedPoint {
  State z{};
  double lambda_u = 0.0, lambda_s = 0.0;
  State v_u{}, v_s{};  // unit eigenvectors, v_u with nonnegative x component
  double residual = 0.0;
  std::array<double, 4> jacobian{};  // row-major
};

namespace detail {

inline std::array<double, 4> map_jacobian(const StroboscopicMap& M, const State& z, double h) {
  std::array<double, 4> J{};
  for (int k = 0; k < 2; ++k) {
    State a = z, b = z;
    a[k] += h;
    b[k] -= h;
    const State fa = M.forward(a), fb = M.forward(b);
    J[0 * 2 + k] = (fa[0] - fb[0]) / (2 * h);
    J[1 * 2 + k] = (fa[1] - fb[1]) / (2 * h);
  }
  return J;
}

inline State eigvec(const std::array<double, 4>& J, double lam) {
  // (J - lam I) v = 0; pick the better-conditioned row
  const double a = J[0] - lam, b = J[1], c = J[2], d = J[3] - lam;
  State v = std::abs(a) + std::abs(b) >= std::abs(c) + std::abs(d) ? State{-b, a} : State{-d, c};
  const double n = std::hypot(v[0], v[1]);
  v[0] /= n;
  v[1] /= n;
  if (v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0)) {
    v[0] = -v[0];
    v[1] = -v[1];
  }
  return v;
}

}  // namespace detail

/// Newton on P(z) - z from the origin with a central-difference Jacobian.
inline SaddleFixedPoint find_saddle(const StroboscopicMap& M, State z0 = {0.0, 0.0}) {
  State z = z0;
  const double h = 1e-6;
  double res = 0.0;
  for (int it = 0; it < 40; ++it) {
    const State f = M.forward(z);
    const double r0 = f[0] - z[0], r1 = f[1] - z[1];
    res = std::hypot(r0, r1);
    if (res < 1e-13) break;
    auto J = detail::map_jacobian(M, z, h);
    J[0] -= 1.0;
    J[3] -= 1.0;
    const double det = J[0] * J[3] - J[1] * J[2];
    if (det == 0.0 || !std::isfinite(det)) throw NoConvergence("singular Newton matrix");
    const double dx = (J[3] * r0 - J[1] * r1) / det;
    const double dy = (-J[2] * r0 + J[0] * r1) / det;
    z[0] -= dx;
    z[1] -= dy;
    if (std::hypot(z[0], z[1]) > 1.0) throw NoConvergence("Newton left the saddle neighbourhood");
  }
  const State f = M.forward(z);
  res = std::hypot(f[0] - z[0], f[1] - z[1]);
  if (!(res < 1e-11)) throw NoConvergence("saddle residual " + std::to_string(res));
  SaddleFixedPoint fp;
  fp.z = z;
  fp.residual = res;
  fp.jacobian = detail::map_jacobian(M, z, h);
  const auto& J = fp.jacobian;
  const double tr = J[0] + J[3], det = J[0] * J[3] - J[1] * J[2];
  const double disc = tr * tr / 4.0 - det;
  if (!(disc > 0.0)) throw NoConvergence("fixed point is not a saddle");
  const double r = std::sqrt(disc);
  double l1 = tr / 2.0 + (tr > 0 ? r : -r);  // larger magnitude, computed stably
  double l2 = det / l1;
  if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
  if (!(std::abs(l1) > 1.0 && std::abs(l2) < 1.0 && l2 != 0.0)) throw NoConvergence("fixed point is not a saddle");
  fp.lambda_u = l1;
  fp.lambda_s = l2;
  fp.v_u = detail::eigvec(J, l1);
  fp.v_s = detail::eigvec(J, l2);
  return fp;
}

// ---------------------------------------------------------------- manifolds

enum class ManifoldSide { STABLE, UNSTABLE };

struct ManifoldBranch {
  ManifoldSide side = ManifoldSide::UNSTABLE;
  int sign = 1;  // +- eigenvector
  std::vector<State> polyline;
  double arclength = 0.0;
  double spacing = 0.0;  // gap bound the polyline honours
};

struct GrowOptions {
  double delta = 1e-7;
  double spacing = 5e-3;
  double max_angle = 0.3;  // radians between consecutive segments
  std::size_t max_points = 400000;
  double min_param_gap = 1e-13;
  int max_layers = 60;
};

/// Iterate a fundamental domain of the linear manifold, inserting
/// preimages wherever consecutive images are too far apart or the polyline
/// turns too sharply. The stable side uses the inverse map.
inline ManifoldBranch grow_manifold(const StroboscopicMap& M, const SaddleFixedPoint& fp, ManifoldSide side,
                                   int sign, double budget, const GrowOptions& opt = {}) {
  const bool unstable = side == ManifoldSide::UNSTABLE;
  const double Lam = unstable ? fp.lambda_u : 1.0 / fp.lambda_s;
  if (!(Lam > 1.0)) throw DomainError("orientation-reversing saddle is not supported");
  const State v = unstable ? fp.v_u : fp.v_s;
  auto step = [&](const State& s) { return unstable ? M.forward(s) : M.backward(s); };
  auto seed = [&](double u) {
    const double r = sign * opt.delta * std::pow(Lam, u);
    return State{fp.z[0] + r * v[0], fp.z[1] + r * v[1]};
  };
  auto point = [&](int k, double u) {
    State s = seed(u);
    for (int i = 0; i < k; ++i) s = step(s);
    return s;
  };
  auto dist = [](const State& a, const State& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); };

  ManifoldBranch br;
  br.side = side;
  br.sign = sign;
  br.spacing = opt.spacing;
  br.polyline.push_back(fp.z);

  std::vector<double> us;
  std::vector<State> pts;
  for (int i = 0; i <= 8; ++i) {
    us.push_back(i / 8.0);
    pts.push_back(seed(i / 8.0));
  }
  double arc = dist(fp.z, pts.front());
  br.polyline.push_back(pts.front());
  for (int k = 0;; ++k) {
    if (k > opt.max_layers) throw BudgetExhausted("arclength budget not reached within the layer limit");
    if (k > 0)
      for (auto& p : pts) p = step(p);
    // refine this layer
    for (std::size_t i = 0; i + 1 < pts.size();) {
      const double g = dist(pts[i], pts[i + 1]);
      bool split = g > opt.spacing;
      if (!split && i + 2 < pts.size() && g > 0.1 * opt.spacing) {
        const double ax = pts[i + 1][0] - pts[i][0], ay = pts[i + 1][1] - pts[i][1];
        const double bx = pts[i + 2][0] - pts[i + 1][0], by = pts[i + 2][1] - pts[i + 1][1];
        const double ang = std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by);
        split = ang > opt.max_angle;
      }
      if (!split) {
        ++i;
        continue;
      }
      if (us[i + 1] - us[i] < opt.min_param_gap)
        throw FoldResolutionFailure("cannot resolve manifold fold near (" + std::to_string(pts[i][0]) + ", " +
                                    std::to_string(pts[i][1]) + ")");
      const double um = 0.5 * (us[i] + us[i + 1]);
      us.insert(us.begin() + i + 1, um);
      pts.insert(pts.begin() + i + 1, point(k, um));
      if (pts.size() > opt.max_points) throw BudgetExhausted("manifold point budget exhausted");
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      arc += dist(pts[i - 1], pts[i]);
      br.polyline.push_back(pts[i]);
      if (arc >= budget) {
        br.arclength = arc;
        return br;
      }
    }
    if (br.polyline.size() > opt.max_points) throw BudgetExhausted("manifold point budget exhausted");
  }
}

// ---------------------------------------------------------------- geometric splitting

enum class SplitVerdict { TRANSVERSAL, TANGENT, DISJOINT };

inline const char* to_string(SplitVerdict v) {
  switch (v) {
    case SplitVerdict::TRANSVERSAL: return "TRANSVERSAL";
    case SplitVerdict::TANGENT: return "TANGENT";
    case SplitVerdict::DISJOINT: return "DISJOINT";
  }
  return "?";
}

struct SplittingReport {
  std::vector<std::array<double, 2>> profile;  // (arclength along u, signed distance to s)
  std::size_t crossings = 0;
  double min_abs_distance = INFINITY;
  double section_offset = NAN;  // y_u - y_s on the reference section
  SplitVerdict verdict = SplitVerdict::DISJOINT;
};

namespace detail {

inline bool segments_cross(const State& a, const State& b, const State& c, const State& d) {
  auto orient = [](const State& p, const State& q, const State& r) {
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
  };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

// signed distance from p to polyline; positive on the left of the direction of travel
inline double signed_distance(const State& p, const std::vector<State>& pl) {
  double best = INFINITY, sgn = 1.0;
  for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
    const double ax = pl[i][0], ay = pl[i][1];
    const double dx = pl[i + 1][0] - ax, dy = pl[i + 1][1] - ay;
    const double L2 = dx * dx + dy * dy;
    double t = L2 > 0 ? ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double qx = ax + t * dx - p[0], qy = ay + t * dy - p[1];
    const double d = std::hypot(qx, qy);
    if (d < best) {
      best = d;
      sgn = (dx * (p[1] - ay) - dy * (p[0] - ax)) >= 0 ? 1.0 : -1.0;
    }
  }
  return sgn * best;
}

// first crossing of x = xs along the polyline with y of the requested sign
inline std::optional<double> section_y(const std::vector<State>& pl, double xs, int ysign) {
  for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
    const auto& a = pl[i];
    const auto& b = pl[i + 1];
    if ((a[0] - xs) * (b[0] - xs) <= 0.0 && a[0] != b[0]) {
      const double t = (xs - a[0]) / (b[0] - a[0]);
      const double y = a[1] + t * (b[1] - a[1]);
      if (y * ysign > 0) return y;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Geometric comparison of an unstable and a stable branch of one map:
/// proper crossings of the polylines away from the saddle give TRANSVERSAL;
/// otherwise the smallest separation decides TANGENT (below `graze`) or
/// DISJOINT. The signed-distance profile is sampled along the unstable
/// branch outside the exclusion radius.
inline SplittingReport splitting_report(const ManifoldBranch& u, const ManifoldBranch& s, double exclusion = 0.05,
                                        double graze = 1e-6) {
  if (u.side != ManifoldSide::UNSTABLE || s.side != ManifoldSide::STABLE)
    throw DomainError("splitting_report needs an unstable and a stable branch");
  SplittingReport rep;
  const State o = u.polyline.front();
  auto far = [&](const State& p) { return std::hypot(p[0] - o[0], p[1] - o[1]) > exclusion; };
  std::vector<State> sfar;
  for (const auto& p : s.polyline)
    if (far(p)) sfar.push_back(p);
  double arc = 0.0;
  for (std::size_t i = 1; i < u.polyline.size(); ++i) {
    const auto& a = u.polyline[i - 1];
    const auto& b = u.polyline[i];
    arc += std::hypot(b[0] - a[0], b[1] - a[1]);
    if (!far(a) || !far(b)) continue;
    for (std::size_t j = 1; j < s.polyline.size(); ++j) {
      const auto& c = s.polyline[j - 1];
      const auto& d = s.polyline[j];
      if (!far(c) || !far(d)) continue;
      if (detail::segments_cross(a, b, c, d)) ++rep.crossings;
    }
    if (sfar.size() >= 2) {
      const double sd = detail::signed_distance(b, sfar);
      rep.profile.push_back({arc, sd});
      rep.min_abs_distance = std::min(rep.min_abs_distance, std::abs(sd));
    }
  }
  // reference section halfway to the vertex of the loop the unstable branch leaves into
  const double xv = (u.sign > 0 ? 1.0 : -1.0) * std::numbers::sqrt2 / 2.0 + o[0];
  const int ysign = u.sign > 0 ? -1 : 1;
  const auto yu = detail::section_y(u.polyline, xv, ysign);
  const auto ys = detail::section_y(s.polyline, xv, ysign);
  if (yu && ys) rep.section_offset = *yu - *ys;
  if (rep.crossings > 0) rep.verdict = SplitVerdict::TRANSVERSAL;
  else if (rep.min_abs_distance < graze) rep.verdict = SplitVerdict::TANGENT;
  else rep.verdict = SplitVerdict::DISJOINT;
  return rep;
}

// ---------------------------------------------------------------- phase-resolved splitting

/// Which separatrix pair is compared. First letter: loop the unstable
/// branch leaves into; second: loop the stable branch arrives from. The
/// comparison section is the vertex (y = 0) of the second loop.
enum class BranchPair { RR, LL, RL, LR };

inline const char* to_string(BranchPair b) {
  switch (b) {
    case BranchPair::RR: return "rr";
    case BranchPair::LL: return "ll";
    case BranchPair::RL: return "rl";
    case BranchPair::LR: return "lr";
  }
  return "?";
}

struct PhaseSample {
  double theta = 0.0;  // section phase in [0, T)
  double H_u = NAN, H_s = NAN;
  double S = NAN;  // H_u - H_s
  bool valid = false;
};

struct PhaseProfile {
  BranchPair pair = BranchPair::RR;
  std::vector<PhaseSample> samples;
  double max = NAN, min = NAN;
  double theta_max = NAN, theta_min = NAN;
  SplitVerdict verdict = SplitVerdict::DISJOINT;
};

struct ProfileOptions {
  int phases = 32;
  double delta = 1e-7;
  double t_max = 200.0;
  int max_crossings = 4;
  double graze = 1e-9;  // |S| below which a one-signed profile counts as tangent
  bool refine_extrema = true;
  ode::Tolerances tol = tight_tolerances();
};

namespace detail {

struct Arrival {
  double t;
  State s;
};

// Integrate from s0 at t0 (forward if dir > 0) to the first y = 0 crossing
// with x of sign want_x.
inline std::optional<Arrival> vertex_arrival(const Rhs& f, State s0, double t0, double dir, int want_x,
                                             const ProfileOptions& opt) {
  double t = t0;
  State s = s0;
  auto g = [](double, const State& x) { return x[1]; };
  for (int n = 0; n < opt.max_crossings; ++n) {
    const auto hit = ode::integrate_until(f, s, t, t0 + dir * opt.t_max, g, 0, opt.tol, n == 0 ? 0.0 : 1e-3);
    if (!hit.hit) return std::nullopt;
    if ((hit.s[0] > 0 ? 1 : -1) == want_x) return Arrival{hit.t, hit.s};
    if (std::abs(hit.s[0]) > 50.0) return std::nullopt;
    t = hit.t;
    s = hit.s;
  }
  return std::nullopt;
}

inline double wrap(double d, double T) {
  d = std::fmod(d, T);
  if (d > 0.5 * T) d -= T;
  if (d <= -0.5 * T) d += T;
  return d;
}

// Energy at the vertex crossing that happens at phase theta (mod T).
inline std::optional<double> phase_locked_energy(const Rhs& f, const State& seed_dir, double theta, double T,
                                                 double dir, int want_x, const ProfileOptions& opt) {
  const State s0{opt.delta * seed_dir[0], opt.delta * seed_dir[1]};
  auto a0 = vertex_arrival(f, s0, theta, dir, want_x, opt);
  if (!a0) return std::nullopt;
  double start = theta - (a0->t - theta);  // first guess: shift by the travel time
  // After a close pass by the saddle the travel time jitters well above 1e-12
  // with the integrator's roundoff; a miss of 1e-8 T moves H by O(eps p3 1e-8),
  // so the best iterate is accepted once the iteration stalls below that.
  // Secant steps: a branch that brushes the saddle on its way has a travel
  // time that depends strongly on the start phase, and the plain update
  // start -= miss then oscillates.
  double best_miss = INFINITY, best_h = NAN;
  double s_prev = NAN, m_prev = NAN;
  for (int it = 0; it < 60; ++it) {
    const auto a = vertex_arrival(f, s0, start, dir, want_x, opt);
    if (!a) return std::nullopt;
    const double miss = wrap(a->t - theta, T);
    if (std::abs(miss) < best_miss) {
      best_miss = std::abs(miss);
      best_h = hamiltonian(a->s[0], a->s[1]);
    }
    if (std::abs(miss) < 1e-12 * std::max(1.0, T)) return best_h;
    if (it >= 6 && best_miss < 1e-8 * T) return best_h;
    double slope = 1.0;
    if (!std::isnan(s_prev) && start != s_prev && std::abs(miss - m_prev) < 0.25 * T) {
      const double sl = (miss - m_prev) / (start - s_prev);
      if (sl > 0.02 && sl < 50.0) slope = sl;
    }
    s_prev = start;
    m_prev = miss;
    start -= miss / slope;
  }
  return std::nullopt;  // no lock: counted as a miss, like a branch that never arrives
}

}  // namespace detail

/// S(theta) = H_u - H_s where the unstable and stable branches of the
/// origin cross the comparison vertex at time theta (mod 2pi/p4). For the
/// transformed equation S = eps M(theta) + O(eps^2), M the Melnikov integral
/// with the loop at its vertex at t0 = theta.
inline PhaseSample phase_sample(const Params& P, BranchPair pair, double theta, const ProfileOptions& opt = {}) {
  const Rhs f{P, Variant::TRANSFORMED};
  const double T = 2.0 * std::numbers::pi / P.p4;
  const double d = std::sqrt(P.eps * P.eps * P.p1 * P.p1 + 4.0);
  const double lu = 0.5 * (P.eps * P.p1 + d), ls = 0.5 * (P.eps * P.p1 - d);
  const int su = (pair == BranchPair::RR || pair == BranchPair::RL) ? 1 : -1;
  const int ss = (pair == BranchPair::RR || pair == BranchPair::LR) ? 1 : -1;
  PhaseSample out;
  out.theta = theta;
  const auto hu = detail::phase_locked_energy(f, {su * 1.0, su * lu}, theta, T, 1.0, ss, opt);
  const auto hs = detail::phase_locked_energy(f, {ss * 1.0, ss * ls}, theta, T, -1.0, ss, opt);
  if (hu && hs) {
    out.H_u = *hu;
    out.H_s = *hs;
    out.S = *hu - *hs;
    out.valid = true;
  }
  return out;
}

inline PhaseProfile splitting_profile(const Params& P, BranchPair pair, const ProfileOptions& opt = {}) {
  P.validate();
  if (!(P.p4 > 0.0)) throw DomainError("phase profile needs p4 > 0");
  const double T = 2.0 * std::numbers::pi / P.p4;
  PhaseProfile pr;
  pr.pair = pair;
  for (int i = 0; i < opt.phases; ++i) pr.samples.push_back(phase_sample(P, pair, T * i / opt.phases, opt));
  int nv = 0, imax = -1, imin = -1;
  for (int i = 0; i < opt.phases; ++i) {
    const auto& s = pr.samples[i];
    if (!s.valid) continue;
    ++nv;
    if (imax < 0 || s.S > pr.samples[imax].S) imax = i;
    if (imin < 0 || s.S < pr.samples[imin].S) imin = i;
  }
  if (nv == 0) throw SectionAmbiguity("no branch reached the comparison vertex");
  pr.max = pr.samples[imax].S;
  pr.min = pr.samples[imin].S;
  pr.theta_max = pr.samples[imax].theta;
  pr.theta_min = pr.samples[imin].theta;
  if (opt.refine_extrema && nv == opt.phases) {
    const double h = T / opt.phases;
    // sgn = +1 refines the maximum, -1 the minimum
    auto refine = [&](double th, double sgn, double& val, double& at) {
      auto fn = [&](double x) {
        const auto s = phase_sample(P, pair, x, opt);
        return s.valid ? -sgn * s.S : INFINITY;
      };
      std::uintmax_t it = 60;
      const auto m = boost::math::tools::brent_find_minima(fn, th - h, th + h, 40, it);
      const double cand = -sgn * m.second;
      if (sgn * cand > sgn * val) {
        val = cand;
        at = std::fmod(m.first + T, T);
      }
    };
    refine(pr.theta_max, 1.0, pr.max, pr.theta_max);
    refine(pr.theta_min, -1.0, pr.min, pr.theta_min);
  }
  if (pr.max > 0.0 && pr.min < 0.0) pr.verdict = SplitVerdict::TRANSVERSAL;
  else if (std::min(std::abs(pr.max), std::abs(pr.min)) <= opt.graze) pr.verdict = SplitVerdict::TANGENT;
  else pr.verdict = SplitVerdict::DISJOINT;
  return pr;
}

// ---------------------------------------------------------------- autonomous connections

enum class Connection { RIGHT_LOOP, LEFT_LOOP, BIG_LOOP, NONE };

inline const char* to_string(Connection c) {
  switch (c) {
    case Connection::RIGHT_LOOP: return "RIGHT_LOOP";
    case Connection::LEFT_LOOP: return "LEFT_LOOP";
    case Connection::BIG_LOOP: return "BIG_LOOP";
    case Connection::NONE: return "NONE";
  }
  return "?";
}

/// Return defects of the right unstable separatrix for the autonomous flow.
/// After the first vertex the branch either crosses x = 0 (defect +|y| at
/// the crossing, it passed outside the stable branch) or turns back with
/// y = 0 at x != 0 (defect -|x|). Both vanish at a connection. d1 is measured
/// on the first return to the saddle (right loop), d2 on the second (big
/// loop, defined only when d1 > 0).
struct ConnectionDefects {
  double d1 = NAN;
  double d2 = NAN;
  double d_left = NAN;  // d1 of the left branch
  bool escaped = false;
};

namespace detail {

inline std::optional<double> return_defect(const Rhs& f, State& s, double& t, double t_max, const ode::Tolerances& tol) {
  // skip the vertex: first y sign change
  auto gy = [](double, const State& x) { return x[1]; };
  auto v = ode::integrate_until(f, s, t, t + t_max, gy, 0, tol, 1e-3);
  if (!v.hit) return std::nullopt;
  s = v.s;
  t = v.t;
  // then x = 0 or y = 0, whichever first: the oriented product x y is
  // positive until one of them changes sign
  const double sx = s[0] > 0 ? 1.0 : -1.0;
  State ds{};
  f(s, ds, t);
  const double sy = ds[1] > 0 ? 1.0 : -1.0;  // y leaves the vertex with the sign of y'
  auto g = [sx, sy](double, const State& x) { return sx * x[0] * sy * x[1]; };
  auto h = ode::integrate_until(f, s, t, t + t_max, g, -1, tol, 1e-3);
  if (!h.hit) return std::nullopt;
  s = h.s;
  t = h.t;
  if (std::abs(s[0]) < std::abs(s[1])) return std::abs(s[1]);  // crossed x = 0
  return -std::abs(s[0]);
}

}  // namespace detail

inline ConnectionDefects autonomous_connection_defects(double p1, double p2, double eps,
                                                       const ode::Tolerances& tol = tight_tolerances(),
                                                       double delta = 1e-8) {
  Params P{eps, p1, p2, 0.0, 1.0};
  const Rhs f{P, Variant::ORIGINAL};
  const double lu = 0.5 * (eps * p1 + std::sqrt(eps * eps * p1 * p1 + 4.0));
  ConnectionDefects out;
  const double t_max = 100.0;
  {
    State s{delta, delta * lu};
    double t = 0.0;
    try {
      const auto d1 = detail::return_defect(f, s, t, t_max, tol);
      if (!d1) {
        out.escaped = true;
      } else {
        out.d1 = *d1;
        if (out.d1 > 0.0) {
          const auto d2 = detail::return_defect(f, s, t, t_max, tol);
          if (d2) out.d2 = *d2;
          else out.escaped = true;
        }
      }
    } catch (const NonFinite&) {
      out.escaped = true;
    } catch (const StepFailure&) {
      out.escaped = true;
    }
  }
  {
    State s{-delta, -delta * lu};
    double t = 0.0;
    try {
      const auto dl = detail::return_defect(f, s, t, t_max, tol);
      if (dl) out.d_left = *dl;
    } catch (const NonFinite&) {
    } catch (const StepFailure&) {
    }
  }
  return out;
}

struct ConnectionResult {
  Connection kind = Connection::NONE;
  double defect = NAN;
  ConnectionDefects defects;
};

inline ConnectionResult autonomous_connection(double p1, double p2, double eps, double tol_defect = 1e-6) {
  ConnectionResult r;
  r.defects = autonomous_connection_defects(p1, p2, eps);
  const auto& d = r.defects;
  auto pick = [&](Connection c, double v) {
    if (!std::isnan(v) && std::abs(v) <= tol_defect && (std::isnan(r.defect) || std::abs(v) < std::abs(r.defect))) {
      r.kind = c;
      r.defect = v;
    }
  };
  pick(Connection::RIGHT_LOOP, d.d1);
  pick(Connection::LEFT_LOOP, d.d_left);
  pick(Connection::BIG_LOOP, d.d2);
  return r;
}

/// Big-loop parameters on the segment p2 in [lo, hi] at fixed p1: scan for
/// sign changes of d2 and refine each by root finding.
inline std::vector<double> locate_big_loops(double p1, double eps, double lo, double hi, int n = 150,
                                            double xtol = 1e-9) {
  std::vector<double> roots;
  auto d2 = [&](double p2) { return autonomous_connection_defects(p1, p2, eps).d2; };
  double pa = lo, fa = d2(lo);
  for (int i = 1; i <= n; ++i) {
    const double pb = lo + (hi - lo) * i / n;
    const double fb = d2(pb);
    if (!std::isnan(fa) && !std::isnan(fb) && (fa > 0) != (fb > 0)) {
      std::uintmax_t it = 100;
      auto tol = [xtol](double a, double b) { return std::abs(a - b) < xtol; };
      auto r = boost::math::tools::toms748_solve(d2, pa, pb, fa, fb, tol, it);
      roots.push_back(0.5 * (r.first + r.second));
    }
    pa = pb;
    fa = fb;
  }
  return roots;
}

/// Right-loop parameter p2 at fixed p1 (root of d1).
inline double locate_right_loop(double p1, double eps, double lo, double hi, double xtol = 1e-10) {
  auto d1 = [&](double p2) { return autonomous_connection_defects(p1, p2, eps).d1; };
  const double fa = d1(lo), fb = d1(hi);
  if (std::isnan(fa) || std::isnan(fb) || (fa > 0) == (fb > 0)) throw NoSolution("no right-loop sign change");
  std::uintmax_t it = 100;
  auto tol = [xtol](double a, double b) { return std::abs(a - b) < xtol; };
  auto r = boost::math::tools::toms748_solve(d1, lo, hi, fa, fb, tol, it);
  return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------- tangency curves

struct TangencyPoint {
  double p2 = 0.0;
  double p3 = NAN;
  bool found = false;
  std::string note;
};

struct TangencyCurve {
  std::string label;
  BranchPair pair = BranchPair::RR;
  std::vector<TangencyPoint> points;
};

/// For each p2, the p3 in [p3_lo, p3_hi] where the branch pair becomes
/// tangent: root of the one-sided extremum of the phase profile (min S when
/// the mean splitting is positive, max S when negative). A bracket without a
/// sign change is reported as BisectionAmbiguity in the point's note.
inline TangencyCurve trace_tangency_curve(double p1, double p4, double eps, BranchPair pair,
                                          const std::vector<double>& p2_grid, double p3_lo, double p3_hi,
                                          const ProfileOptions& popt = {}, double p3_tol = 1e-4) {
  TangencyCurve c;
  c.pair = pair;
  c.label = std::string("numeric-") + to_string(pair);
  for (double p2 : p2_grid) {
    TangencyPoint tp;
    tp.p2 = p2;
    try {
      // side of the mean splitting: the autonomous value when the branch
      // reaches the vertex at p3 = 0, else the mid-range at the bracket start
      const Params P0{eps, p1, p2, 0.0, p4};
      const auto base = phase_sample(P0, pair, 0.0, popt);
      double mid = base.S;
      if (!base.valid) {
        const auto pr = splitting_profile(Params{eps, p1, p2, p3_lo, p4}, pair, popt);
        mid = 0.5 * (pr.max + pr.min);
      }
      const double sg = mid >= 0 ? 1.0 : -1.0;
      auto g = [&](double p3) {
        const auto pr = splitting_profile(Params{eps, p1, p2, p3, p4}, pair, popt);
        return sg > 0 ? pr.min : -pr.max;
      };
      const double ga = g(p3_lo), gb = g(p3_hi);
      if ((ga > 0) == (gb > 0)) throw BisectionAmbiguity("no verdict flip in the p3 bracket");
      std::uintmax_t it = 60;
      auto tol = [p3_tol](double a, double b) { return std::abs(a - b) < p3_tol; };
      auto r = boost::math::tools::toms748_solve(g, p3_lo, p3_hi, ga, gb, tol, it);
      tp.p3 = 0.5 * (r.first + r.second);
      tp.found = true;
    } catch (const Error& e) {
      tp.note = e.what();
    }
    c.points.push_back(tp);
  }
  return c;
}

}  // namespace dvdp::flow
