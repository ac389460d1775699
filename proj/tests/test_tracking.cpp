#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "wft/driver.hpp"
#include "wft/oracles.hpp"
#include "wft/tracking.hpp"

using namespace wft;

namespace {

constexpr double kDeg = kPi / 180.0;

RunConfig straight_wedge(double mach_in = 3.0, double theta = 10.0 * kDeg) {
  RunConfig cfg;
  cfg.gas = GasModel{1.4, 1.0, 1.0};
  cfg.inflow = {{-8.0, uniform_state(mach_in, theta, cfg.gas)}};
  cfg.boundary = WedgeBoundary::from_vertices({{0.0, 0.0}, {10.0, 0.0}});
  cfg.eps = 1e-2;
  cfg.x_max = 2.0;
  return cfg;
}

/// One inflow jump plus two boundary vertices; the standard exercise case.
RunConfig perturbed_wedge(double eps, std::uint64_t seed = 1) {
  RunConfig cfg;
  cfg.gas = GasModel{1.4, 1.0, 1.0};
  const State base = uniform_state(3.0, 10.0 * kDeg, cfg.gas);
  State upper = base;
  upper.p *= 1.004;
  upper.rho *= 1.002;
  cfg.inflow = {{-8.0, base}, {-0.6, upper}};
  cfg.boundary = WedgeBoundary::from_vertices(
      {{0.0, 0.0},
       {0.8, 0.0},
       {1.6, 0.8 * std::tan(0.8 * kDeg)},
       {2.4, 0.8 * std::tan(0.8 * kDeg) + 0.8 * std::tan(0.2 * kDeg)},
       {10.0, 0.8 * std::tan(0.8 * kDeg) + 9.0 * std::tan(0.2 * kDeg)}});
  cfg.eps = eps;
  cfg.x_max = 3.0;
  cfg.seed = seed;
  return cfg;
}

void check_chain(const FrontSet& fs) {
  REQUIRE(fs.regions.size() == fs.fronts.size() + 1);
  for (size_t i = 0; i < fs.fronts.size(); ++i) {
    CHECK(state_dist(fs.fronts[i].d.left, fs.regions[i]) == 0.0);
    CHECK(state_dist(fs.fronts[i].d.right, fs.regions[i + 1]) == 0.0);
  }
}

}  // namespace

TEST_CASE("uniform inflow over a flat wedge produces no fronts") {
  RunConfig cfg = straight_wedge(3.0, 0.0);
  Engine eng(cfg);
  CHECK(eng.state().fronts.empty());
  CHECK(!eng.next_event().has_value());
}

TEST_CASE("straight wedge: one strong front matching the oracle") {
  const RunConfig cfg = straight_wedge();
  Engine eng(cfg);
  const FrontSet& fs = eng.state();
  REQUIRE(fs.fronts.size() == 1);
  REQUIRE(fs.strong_index == 0);
  check_chain(fs);

  const ObliqueShockSolution oracle = oblique_shock(3.0, 10.0 * kDeg, 1.4);
  const double expected = std::tan(10.0 * kDeg - oracle.beta_weak);
  CHECK(std::abs(eng.sigma0() - expected) / std::abs(expected) < 1e-8);

  // Downstream state is wall tangent.
  const State& wall = fs.wall_state();
  CHECK(std::abs(wall.v) <= 1e-10 * std::hypot(wall.u, wall.v));

  // No events: the single front never meets the horizontal wall.
  CHECK(!eng.next_event().has_value());
}

TEST_CASE("inflow jump produces at most 4 weak fronts plus the strong one") {
  RunConfig cfg = straight_wedge();
  State upper = cfg.inflow[0].state;
  upper.p *= 1.001;
  cfg.inflow = {{-8.0, cfg.inflow[0].state}, {-1.0, upper}};
  Engine eng(cfg);
  size_t weak = 0, strong = 0;
  for (const auto& f : eng.state().fronts)
    (f.strong ? strong : weak)++;
  CHECK(strong == 1);
  CHECK(weak  <= 4);
  CHECK(weak >= 1);
  check_chain(eng.state());
}

TEST_CASE("next_event geometry") {
  // Two adjacent fronts with slopes +-0.5 starting one apart collide after
  // dx = 1. Drive the engine's arithmetic through a crafted front set by
  // checking the formula on a real run instead: the first interaction of
  // the perturbed wedge happens where the 4-wave from the inflow jump
  // meets the strong front.
  RunConfig cfg = perturbed_wedge(1e-2);
  Engine eng(cfg);
  const auto ev = eng.next_event();
  REQUIRE(ev.has_value());
  CHECK(ev->x > 0.0);
  // Verify the reported intersection against the two participants.
  const FrontSet& fs = eng.state();
  REQUIRE(ev->pos + 1 < fs.fronts.size());
  const Front& a = fs.fronts[ev->pos];
  const Front& b = fs.fronts[ev->pos + 1];
  CHECK(std::abs(a.y_at(ev->x) - b.y_at(ev->x)) < 1e-12);
}

TEST_CASE("threshold dispatch: accurate above mu_eps, simplified below") {
  RunConfig cfg = perturbed_wedge(1e-2);
  cfg.mu_eps = 1e-6;
  {
    RunHistory h = run(cfg);
    REQUIRE(h.failure.empty());
    bool saw_accurate = false;
    for (size_t i = 0; i < h.outcomes.size(); ++i) {
      const StepOutcome& o = h.outcomes[i];
      if (o.ev.kind == EventKind::weak_weak && o.waves_in.size() == 2) {
        const double prod =
            std::abs(o.waves_in[0].second * o.waves_in[1].second);
        if (o.solver == "accurate") {
          CHECK(prod > cfg.mu_eps);
          saw_accurate = true;
        } else {
          CHECK(prod <= cfg.mu_eps);
        }
      }
    }
    (void)saw_accurate;
  }
  // With a huge mu_eps every weak-weak interaction is simplified.
  cfg.mu_eps = 1e3;
  RunHistory h2 = run(cfg);
  for (const auto& o : h2.outcomes)
    if (o.ev.kind == EventKind::weak_weak) CHECK(o.solver == "simplified");
}

TEST_CASE("perturbed wedge run: invariants along the way") {
  RunConfig cfg = perturbed_wedge(1e-2);
  Engine eng(cfg);
  const GasModel& g = cfg.gas;

  int steps = 0;
  while (auto ev = eng.next_event()) {
    eng.step(*ev);
    const FrontSet& fs = eng.state();
    check_chain(fs);

    // Exactly one strong front.
    int strong_count = 0;
    for (const auto& f : fs.fronts) strong_count += f.strong ? 1 : 0;
    CHECK(strong_count == 1);
    CHECK(fs.strong_index >= 0);
    CHECK(fs.fronts[fs.strong_index].strong);

    // y-ordering of fronts at the current station.
    for (size_t i = 0; i + 1 < fs.fronts.size(); ++i)
      CHECK(fs.fronts[i].y_at(fs.x) <=
            fs.fronts[i + 1].y_at(fs.x) + 1e-12);

    // Wall tangency of the top region.
    const State& wall = fs.wall_state();
    const auto n = cfg.boundary.normal(fs.face);
    CHECK(std::abs(wall.u * n[0] + wall.v * n[1]) <=
          1e-12 * std::hypot(wall.u, wall.v));

    // Every shock front admissible; nonphysical fronts at lambda_hat.
    for (const auto& f : fs.fronts) {
      if (f.nonphysical()) {
        CHECK(f.slope == eng.lambda_hat());
      } else if (f.d.is_shock()) {
        CHECK(admissible(f.d, g).admissible);
      }
    }
    ++steps;
    REQUIRE(steps < 100000);
  }
  CHECK(steps > 5);
}

TEST_CASE("determinism: identical seeds give identical event logs") {
  auto signature = [](const RunHistory& h) {
    std::vector<double> sig;
    for (const auto& o : h.outcomes) {
      sig.push_back(o.ev.x);
      sig.push_back(o.ev.y);
      sig.push_back(double(int(o.ev.kind)));
      for (auto& [fam, s] : o.waves_out) {
        sig.push_back(double(fam));
        sig.push_back(s);
      }
    }
    return sig;
  };
  const RunHistory a = run(perturbed_wedge(1e-2, 7));
  const RunHistory b = run(perturbed_wedge(1e-2, 7));
  const RunHistory c = run(perturbed_wedge(1e-2, 8));
  REQUIRE(a.failure.empty());
  CHECK(signature(a) == signature(b));
  // A different seed still terminates and conserves the event structure,
  // though the exact log may reorder tied collisions.
  CHECK(!c.outcomes.empty());
}

TEST_CASE("vertex event with zero turn changes only the face index") {
  RunConfig cfg = straight_wedge();
  cfg.boundary = WedgeBoundary::from_vertices(
      {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}, {10.0, 0.0}});
  Engine eng(cfg);
  const size_t fronts_before = eng.state().fronts.size();
  auto ev = eng.next_event();
  REQUIRE(ev.has_value());
  REQUIRE(ev->kind == EventKind::boundary_vertex);
  const StepOutcome out = eng.step(*ev);
  CHECK(out.omega_k == 0.0);
  CHECK(eng.state().fronts.size() == fronts_before);
  CHECK(eng.state().face == 1);
}

TEST_CASE("nonphysical strength roughly halves when eps halves") {
  RunConfig c1 = perturbed_wedge(1e-2);
  RunConfig c2 = perturbed_wedge(5e-3);
  const RunHistory h1 = run(c1);
  const RunHistory h2 = run(c2);
  REQUIRE(h1.failure.empty());
  REQUIRE(h2.failure.empty());
  if (h1.np_total_max > 1e-12) {
    CHECK(h2.np_total_max < h1.np_total_max);
  }
}

TEST_CASE("sampling the straight-wedge solution") {
  RunConfig cfg = straight_wedge();
  RunHistory h = run(cfg);
  REQUIRE(h.failure.empty());
  Engine eng(cfg);  // state() is the x = 0 snapshot; sample via history
  const FrontSet fs = reconstruct(h, 1.0);
  REQUIRE(fs.fronts.size() == 1);
  const double ys = fs.fronts[0].y_at(1.0);
  // Below the strong front: inflow; above: the wall-tangent state.
  const State below = fs.regions[0];
  const State above = fs.regions[1];
  CHECK(state_dist(below, cfg.inflow[0].state) == 0.0);
  CHECK(std::abs(above.v) < 1e-10 * above.u);
  CHECK(ys < 0.0);
}

TEST_CASE("reconstruct matches the live engine at the final station") {
  RunConfig cfg = perturbed_wedge(1e-2);
  Engine eng(cfg);
  while (auto ev = eng.next_event()) eng.step(*ev);
  eng.close_history(cfg.x_max);

  RunHistory h = run(cfg);
  REQUIRE(h.failure.empty());
  const FrontSet rec = reconstruct(h, cfg.x_max);
  const FrontSet& live = eng.state();
  REQUIRE(rec.fronts.size() == live.fronts.size());
  for (size_t i = 0; i < rec.fronts.size(); ++i) {
    CHECK(rec.fronts[i].id == live.fronts[i].id);
    CHECK(state_dist(rec.fronts[i].d.left, live.fronts[i].d.left) == 0.0);
  }
  CHECK((rec.strong_index == live.strong_index));
}
