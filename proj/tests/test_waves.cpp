#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wft/gasdyn.hpp"
#include "wft/oracles.hpp"
#include "wft/waves.hpp"

using namespace wft;

namespace {

const GasModel kAir{1.4, 1.0, 1.0};

/// Arc-parameterized point on the Hugoniot locus continuation (rho < rho0
/// side), found by bisecting the chordal arc length in density.
State hugoniot_continuation_at_arc(const State& u0, WaveFamily fam, double arc,
                                   const GasModel& g) {
  double lo = u0.rho * (g.gamma - 1.0) / (g.gamma + 1.0) * 1.01;
  double hi = u0.rho;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hugoniot_arc(u0, mid, fam, g) > arc)
      lo = mid;
    else
      hi = mid;
  }
  return hugoniot_jump(u0, 0.5 * (lo + hi), fam, g).other;
}

/// Turn the flow by `turn` radians through a rarefaction from front state u0
/// (bisection on the downstream density).
State rarefaction_by_turn(const State& u0, WaveFamily fam, double turn,
                          const GasModel& g) {
  const double a0 = flow_angle(u0);
  double lo = u0.rho * 0.2, hi = u0.rho;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const State s = rarefaction_to_rho(u0, fam, mid, g).end;
    if (std::abs(flow_angle(s) - a0) < turn)
      hi = mid;
    else
      lo = mid;
  }
  return rarefaction_to_rho(u0, fam, 0.5 * (lo + hi), g).end;
}

}  // namespace

TEST_CASE("contact states") {
  const State u0{2.0, 0.4, 1.3, 1.1};
  SECTION("identity at zero parameters") {
    const State s = contact_state(u0, 0.0, 0.0);
    CHECK(s.u == u0.u);
    CHECK(s.v == u0.v);
    CHECK(s.p == u0.p);
    CHECK(s.rho == u0.rho);
  }
  SECTION("p and v/u exactly invariant, contact speed continuous") {
    const State s = contact_state(u0, 0.17, -0.05);
    CHECK(s.p == u0.p);
    CHECK(s.v / s.u == u0.v / u0.u);
    CHECK(eigenvalues(s, kAir)[1] == eigenvalues(u0, kAir)[1]);
  }
  SECTION("r3 flow shifts density exactly") {
    const State a{2.0, 0.0, 1.0, 1.4};
    const State s = contact_state(a, 0.0, std::log(2.0 / 1.4));
    CHECK(s.u == 2.0);
    CHECK(s.v == 0.0);
    CHECK(s.p == 1.0);
    CHECK(s.rho == Catch::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("rarefaction curves") {
  const State u0 = uniform_state(2.0, 0.0, kAir);
  SECTION("alpha = 0 is the identity") {
    const State s = rarefaction_state(u0, WaveFamily::f4, 0.0, kAir);
    CHECK(state_dist(s, u0) == 0.0);
  }
  SECTION("entropy and total enthalpy preserved along the curve") {
    for (WaveFamily fam : {WaveFamily::f1, WaveFamily::f4}) {
      const State s = rarefaction_state(u0, fam, 0.1, kAir);
      CHECK(s.rho < u0.rho);
      CHECK(std::abs(entropy_scalar(s, kAir) - entropy_scalar(u0, kAir)) <
            1e-9);
      const double b0 = enthalpy(u0, kAir) + 0.5 * (u0.u * u0.u + u0.v * u0.v);
      const double b1 = enthalpy(s, kAir) + 0.5 * (s.u * s.u + s.v * s.v);
      CHECK(std::abs(b1 - b0) / b0 < 1e-10);
    }
  }
  SECTION("10 degree turn from Mach 2 lands on the Prandtl-Meyer oracle") {
    const double turn = 10.0 * kPi / 180.0;
    for (WaveFamily fam : {WaveFamily::f1, WaveFamily::f4}) {
      const State s = rarefaction_by_turn(u0, fam, turn, kAir);
      const double nu_target = prandtl_meyer(2.0, kAir.gamma) + turn;
      const double m_expected = prandtl_meyer_inverse(nu_target, kAir.gamma);
      CHECK(mach(s, kAir) == Catch::Approx(m_expected).epsilon(1e-8));
      CHECK(m_expected == Catch::Approx(2.3835).margin(2e-3));
    }
  }
  SECTION("arc length parameterization round-trips") {
    const State s = rarefaction_state(u0, WaveFamily::f4, 0.05, kAir);
    const RarefactionPath back =
        rarefaction_to_rho(s, WaveFamily::f4, u0.rho, kAir);
    CHECK(back.arc == Catch::Approx(0.05).epsilon(1e-10));
    CHECK(state_dist(back.end, u0) < 1e-11);
  }
}

TEST_CASE("hugoniot states satisfy Rankine-Hugoniot exactly") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> machd(1.8, 3.5);
  std::uniform_real_distribution<double> angd(-0.2, 0.2);
  std::uniform_real_distribution<double> ratio(1.001, 2.5);
  for (int i = 0; i < 200; ++i) {
    const State u0 = uniform_state(machd(rng), angd(rng), kAir);
    const WaveFamily fam = (i % 2) ? WaveFamily::f1 : WaveFamily::f4;
    const double rho = u0.rho * ratio(rng);
    if (!(rho < u0.rho * (kAir.gamma + 1.0) / (kAir.gamma - 1.0))) continue;
    HugoniotJump j;
    try {
      j = hugoniot_state(u0, fam, rho, kAir);
    } catch (const regime_error&) {
      continue;  // detached for this (M, ratio) draw
    }
    CHECK(rh_residual(u0, j.other, j.slope, kAir) < 1e-12);
    CHECK(entropy_scalar(j.other, kAir) > entropy_scalar(u0, kAir));
  }
}

TEST_CASE("hugoniot zero-strength limit") {
  const State u0 = uniform_state(2.5, 0.05, kAir);
  const Vec4 lam = eigenvalues(u0, kAir);
  const HugoniotJump j1 =
      hugoniot_state(u0, WaveFamily::f1, u0.rho * (1.0 + 1e-10), kAir);
  CHECK(state_dist(j1.other, u0) < 1e-8);
  CHECK(j1.slope == Catch::Approx(lam[0]).margin(1e-8));
  const HugoniotJump j4 =
      hugoniot_state(u0, WaveFamily::f4, u0.rho * (1.0 + 1e-10), kAir);
  CHECK(j4.slope == Catch::Approx(lam[3]).margin(1e-8));
}

TEST_CASE("hugoniot rejects densities outside the admissible interval") {
  const State u0 = uniform_state(3.0, 0.0, kAir);
  CHECK_THROWS_AS(hugoniot_state(u0, WaveFamily::f1, 0.5 * u0.rho, kAir),
                  regime_error);
  CHECK_THROWS_AS(hugoniot_state(u0, WaveFamily::f1, 6.1 * u0.rho, kAir),
                  regime_error);
}

TEST_CASE("weak-branch 1-shock matches the theta-beta-M oracle") {
  const State u0 = uniform_state(3.0, 0.0, kAir);
  const double theta = 10.0 * kPi / 180.0;
  // Bisection on downstream density for a flow deflection of -10 degrees.
  double lo = u0.rho * 1.0001, hi = u0.rho * 2.8;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const State s = hugoniot_state(u0, WaveFamily::f1, mid, kAir).other;
    if (std::abs(flow_angle(s)) < theta)
      lo = mid;
    else
      hi = mid;
  }
  const HugoniotJump j = hugoniot_state(u0, WaveFamily::f1, 0.5 * (lo + hi), kAir);
  const ObliqueShockSolution oracle = oblique_shock(3.0, theta, kAir.gamma);
  CHECK(flow_angle(j.other) == Catch::Approx(-theta).margin(1e-9));
  CHECK(j.other.p / u0.p ==
        Catch::Approx(oracle.p_ratio_weak).epsilon(1e-8));
  CHECK(oracle.p_ratio_weak == Catch::Approx(2.054).margin(2e-3));
  // The shock slope sits at -(beta - theta_flow) with horizontal inflow.
  CHECK(j.slope == Catch::Approx(-std::tan(oracle.beta_weak)).epsilon(1e-8));
}

TEST_CASE("strong_shock_from_speed") {
  const State u0 = uniform_state(3.0, 10.0 * kPi / 180.0, kAir);
  SECTION("characteristic speed degenerates to u0") {
    const Vec4 lam = eigenvalues(u0, kAir);
    const State s = strong_shock_from_speed(u0, lam[0], kAir);
    CHECK(state_dist(s, u0) < 1e-12);
  }
  SECTION("round-trips with hugoniot_state across strengths") {
    for (double ratio : {1.01, 1.2, 1.8, 2.6, 3.5}) {
      const HugoniotJump j =
          hugoniot_state(u0, WaveFamily::f1, ratio * u0.rho, kAir);
      const State s = strong_shock_from_speed(u0, j.slope, kAir);
      CHECK(state_dist(s, j.other) < 1e-10);
    }
  }
  SECTION("no admissible downstream density is reported distinctly") {
    // A slope strictly between the characteristic cones has cbar < c0.
    CHECK_THROWS_AS(strong_shock_from_speed(u0, u0.v / u0.u, kAir),
                    newton_error);
  }
}

TEST_CASE("second-order contact of shock and rarefaction curves") {
  const State u0 = uniform_state(2.2, 0.1, kAir);
  for (WaveFamily fam : {WaveFamily::f1, WaveFamily::f4}) {
    double prev = 0.0;
    double eps = 1e-2;
    std::vector<double> gaps;
    for (int k = 0; k < 3; ++k) {
      const State r = rarefaction_state(u0, fam, eps, kAir);
      const State h = hugoniot_continuation_at_arc(u0, fam, eps, kAir);
      gaps.push_back(state_dist(r, h));
      eps *= 0.5;
    }
    (void)prev;
    // Third-order contact: halving eps divides the gap by ~8.
    const double order1 = std::log2(gaps[0] / gaps[1]);
    const double order2 = std::log2(gaps[1] / gaps[2]);
    CHECK(order1 > 2.5);
    CHECK(order2 > 2.5);
    CHECK(gaps[0] < 50.0 * 1e-6);  // O(eps^3) scale at eps = 1e-2
  }
}

TEST_CASE("admissibility predicate") {
  const State u0 = uniform_state(2.8, 0.05, kAir);
  const HugoniotJump j = hugoniot_state(u0, WaveFamily::f1, 1.7 * u0.rho, kAir);

  WaveDescriptor w;
  w.family = WaveFamily::f1;
  w.strength = -hugoniot_arc(u0, j.other.rho, WaveFamily::f1, kAir);
  w.left = u0;
  w.right = j.other;
  w.speed = j.slope;

  SECTION("constructed shocks pass") {
    const Admissibility a = admissible(w, kAir);
    CHECK(a.admissible);
    CHECK_FALSE(a.degenerate);
  }
  SECTION("reversed jump fails with a density diagnostic") {
    WaveDescriptor rev = w;
    std::swap(rev.left, rev.right);
    const Admissibility a = admissible(rev, kAir);
    CHECK_FALSE(a.admissible);
    CHECK(a.diagnostic.find("density decreases") != std::string::npos);
  }
  SECTION("zero-strength limit flags degenerate, not violated") {
    WaveDescriptor z = w;
    z.right = u0;
    z.strength = 0.0;
    z.speed = eigenvalues(u0, kAir)[0];
    const Admissibility a = admissible(z, kAir);
    CHECK(a.admissible);
    CHECK(a.degenerate);
  }
  SECTION("rarefaction input rejected") {
    WaveDescriptor r = w;
    r.strength = 0.05;
    CHECK_THROWS_AS(admissible(r, kAir), regime_error);
  }
  SECTION("strong shock form") {
    StrongShock s;
    s.below = u0;
    s.above = j.other;
    s.sigma = j.slope;
    CHECK(admissible(s, kAir).admissible);
  }
}

TEST_CASE("cross_up / cross_down are mutually inverse") {
  const State u0 = uniform_state(2.5, 0.08, kAir);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> td(-0.08, 0.08);
  for (int i = 0; i < 60; ++i) {
    const WaveFamily fam = static_cast<WaveFamily>(1 + int(i % 4));
    const double t = td(rng);
    const Crossing up = cross_up(u0, fam, t, kAir);
    const Crossing down = cross_down(up.other, fam, t, kAir);
    CHECK(state_dist(down.other, u0) < 1e-10);
    if (is_genuinely_nonlinear(fam) && t < 0.0) {
      CHECK(rh_residual(fam == WaveFamily::f1 ? u0 : up.other,
                        fam == WaveFamily::f1 ? up.other : u0, up.slope,
                        kAir) < 1e-12);
    }
  }
}
