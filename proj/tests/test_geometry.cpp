#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dvdp/elliptic.hpp"
#include "dvdp/flow.hpp"
#include "dvdp/geometry.hpp"

using namespace dvdp;

namespace {

const DomainTag kAll[] = {DomainTag::G1_PLUS, DomainTag::G1_MINUS, DomainTag::G2};

// 200 levels per domain, denser towards the separatrix.
std::vector<double> rho_c_grid(DomainTag d, int n = 200) {
  const double hi = inside_loop(d) ? 1.0 : 0.5;
  std::vector<double> v;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    v.push_back(i % 2 ? hi * u : hi * std::pow(10.0, -10.0 * (1.0 - u)));
  }
  return v;
}

}  // namespace

TEST(Geometry, RhoAndEnergyRoundTrip) {
  for (auto d : kAll)
    for (double rc : rho_c_grid(d)) {
      const auto L = level_from_rho_c(rc, d);
      const auto back = level_from_h(L.h, d);
      EXPECT_NEAR(back.rho, L.rho, 1e-12) << to_string(d) << " rc=" << rc;
      EXPECT_NEAR(back.rho_c / rc, 1.0, 1e-12) << to_string(d) << " rc=" << rc;
      EXPECT_NEAR(level_from_rho(L.rho, d).h, L.h, 1e-12 * std::max(1.0, std::abs(L.h)));
    }
}

TEST(Geometry, LevelsRejectWrongDomain) {
  EXPECT_THROW(level_from_h(0.1, DomainTag::G1_PLUS), DomainError);
  EXPECT_THROW(level_from_h(-0.3, DomainTag::G1_MINUS), DomainError);
  EXPECT_THROW(level_from_h(-0.1, DomainTag::G2), DomainError);
  EXPECT_THROW(level_from_rho(0.4, DomainTag::G2), DomainError);
}

TEST(Geometry, ClosedFormOrbitStaysOnItsLevel) {
  for (auto d : kAll)
    for (double rc : {0.9, 0.3, 1e-3, 1e-8}) {
      if (!inside_loop(d) && rc >= 0.5) continue;
      const auto L = level_from_rho_c(rc, d);
      const double T = period(L);
      for (int i = 0; i <= 64; ++i) {
        const auto p = orbit_solution(L, T * i / 64.0);
        EXPECT_NEAR(hamiltonian(p.x, p.y), L.h, 1e-12) << to_string(d) << " rc=" << rc << " i=" << i;
      }
    }
}

TEST(Geometry, ClosedFormOrbitSolvesTheEquation) {
  for (auto d : kAll) {
    const auto L = level_from_rho_c(0.2, d);
    const auto tp = turning_points(L);
    const auto p0 = orbit_solution(L, 0.0);
    EXPECT_NEAR(p0.x, d == DomainTag::G1_MINUS ? -tp.x_max : tp.x_max, 1e-14);
    EXPECT_NEAR(p0.y, 0.0, 1e-14);
    const double h = 1e-5;
    for (double t : {0.3, 1.1, 2.7}) {
      const auto a = orbit_solution(L, t - h), b = orbit_solution(L, t + h), c = orbit_solution(L, t);
      EXPECT_NEAR((b.x - a.x) / (2 * h), c.y, 1e-8);
      EXPECT_NEAR((b.y - a.y) / (2 * h), c.x - c.x * c.x * c.x, 1e-8);
    }
  }
}

// Half a period into a loop orbit sits exactly on the inner turning point,
// i.e. dn(K) = sqrt(1 - m). Boost 1.74's jacobi_elliptic gets dn wrong at
// u = K exactly; the orbit rebuilds dn from cn, so this must hold anyway.
TEST(Geometry, InnerTurningPointAtHalfPeriod) {
  for (double rc : {0.5, 0.2, 0.05}) {
    const auto L = level_from_rho_c(rc, DomainTag::G1_PLUS);
    const auto p = orbit_solution(L, 0.5 * period(L));
    EXPECT_NEAR(p.x, turning_points(L).x_min, 1e-14) << rc;
  }
}

TEST(Geometry, LeftLoopMirrorsRightLoop) {
  const auto R = level_from_rho_c(0.25, DomainTag::G1_PLUS), Lf = level_from_rho_c(0.25, DomainTag::G1_MINUS);
  EXPECT_DOUBLE_EQ(frequency(R), frequency(Lf));
  for (double t : {0.0, 0.7, 2.0}) {
    const auto a = orbit_solution(R, t), b = orbit_solution(Lf, t);
    EXPECT_DOUBLE_EQ(a.x, -b.x);
    EXPECT_DOUBLE_EQ(a.y, -b.y);
  }
}

TEST(Geometry, FrequencyMatchesPeriodQuadrature) {
  for (auto d : kAll)
    for (double rc : rho_c_grid(d)) {
      const auto L = level_from_rho_c(rc, d);
      EXPECT_NEAR(period(L) / period_quadrature(L), 1.0, 1e-8) << to_string(d) << " rc=" << rc;
    }
}

TEST(Geometry, FrequencyLimits) {
  // small loop oscillations around (+-1, 0) have omega -> sqrt 2; large
  // exterior orbits speed up without bound
  EXPECT_NEAR(frequency(level_from_rho_c(1.0 - 1e-9, DomainTag::G1_PLUS)), std::numbers::sqrt2, 1e-8);
  EXPECT_LT(frequency(level_from_rho_c(1e-12, DomainTag::G2)), 0.2);
  EXPECT_GT(frequency(level_from_rho_c(0.5 - 1e-9, DomainTag::G2)), 50.0);
}

// Independent route: integrate the unperturbed flow for one closed-form
// period from the turning point.
TEST(Geometry, IntegratedOrbitClosesAndConservesEnergy) {
  const Params P{0.0, 0.0, 0.0, 0.0, 1.0};
  for (auto d : kAll) {
    const auto L = level_from_rho_c(0.1, d);
    const auto p0 = orbit_solution(L, 0.0);
    std::vector<std::array<double, 3>> path;
    const auto end = flow::integrate_dense({p0.x, p0.y}, 0.0, period(L), P, flow::Variant::ORIGINAL, path);
    EXPECT_NEAR(end[0], p0.x, 1e-9);
    EXPECT_NEAR(end[1], p0.y, 1e-9);
    for (const auto& s : path) EXPECT_NEAR(hamiltonian(s[1], s[2]), L.h, 1e-10);
  }
}

TEST(Geometry, ActionIsAreaOverTwoPi) {
  // near the centre I ~ (h - h_min) / omega_0
  const auto L = level_from_rho_c(1.0 - 1e-4, DomainTag::G1_PLUS);
  EXPECT_NEAR(action(L) / ((L.h + 0.25) / std::numbers::sqrt2), 1.0, 1e-3);
  // the separatrix loop encloses area 4/3
  const auto S = level_from_rho_c(1e-14, DomainTag::G1_PLUS);
  EXPECT_NEAR(action(S), 2.0 / (3.0 * std::numbers::pi), 1e-9);
}
