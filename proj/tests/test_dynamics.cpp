#include <cmath>

#include "doctest.h"
#include "gamedyn/cournot.hpp"
#include "gamedyn/dynamics.hpp"
#include "oracles.hpp"

using namespace gamedyn;

namespace {

const CournotParams kParams{400.0, 200.0, 100.0, 400.0};

FiniteGame discretized_cournot(int points, double a_max) {
  SmoothGame sg = nominal_game(kParams);
  sg.set_action_grid(0, oracles::linspace(0.0, a_max, points));
  sg.set_action_grid(1, oracles::linspace(0.0, a_max, points));
  return sg.discretize();
}

bool trajectories_identical(const Trajectory& a, const Trajectory& b) {
  if (a.states != b.states || a.index_states != b.index_states) return false;
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (a.steps[i].mover != b.steps[i].mover || a.steps[i].w != b.steps[i].w ||
        a.steps[i].improvement != b.steps[i].improvement)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sequential best step") {
  SUBCASE("every player keeps a NE profile") {
    const FiniteGame g({{0.0, 1.0}, {0.0, 1.0}}, {{2, 0, 0, 1}, {2, 0, 0, 1}});
    // (0,0) is a strict NE of this coordination game
    for (int i = 0; i < 2; ++i) CHECK(step_sequential_best(g, {0, 0}, i) == IndexProfile{0, 0});
  }
  SUBCASE("discretized cournot moves to the grid point nearest 100") {
    const FiniteGame g = discretized_cournot(41, 200.0);  // spacing 5, 100 on the grid
    const IndexProfile from = g.nearest_indices({0.0, 0.0});
    const IndexProfile to = step_sequential_best(g, from, 0);
    CHECK(g.coords(to)[0] == doctest::Approx(100.0));
    CHECK(g.coords(to)[1] == 0.0);
  }
  SUBCASE("coordination game keeps the incumbent iff it is optimal") {
    const FiniteGame g({{0.0, 1.0}, {0.0, 1.0}}, {{1, 0, 0, 1}, {1, 0, 0, 1}});
    // at (row0, col1): u1(row0,col1)=0, u1(row1,col1)=1 -> move
    CHECK(step_sequential_best(g, {0, 1}, 0) == IndexProfile{1, 1});
    // at (row0, col0): incumbent already optimal
    CHECK(step_sequential_best(g, {0, 0}, 0) == IndexProfile{0, 0});
  }
  SUBCASE("never decreases the mover's utility; strict increase on change") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto g = oracles::random_game(2, {4, 3}, 900 + seed);
      for (const auto& a : oracles::all_profiles(g)) {
        for (int i = 0; i < 2; ++i) {
          const auto next = step_sequential_best(g, a, i);
          const double gain = g.utility(i, next) - g.utility(i, a);
          CHECK(gain >= 0.0);
          if (next != a) CHECK(gain > 0.0);
        }
      }
    }
  }
}

TEST_CASE("sequential better step") {
  SUBCASE("no improvement at a NE") {
    const FiniteGame g({{0.0, 1.0}, {0.0, 1.0}}, {{2, 0, 0, 1}, {2, 0, 0, 1}});
    for (int i = 0; i < 2; ++i) {
      CHECK_FALSE(step_sequential_better(g, {0, 0}, i, BetterSelector::first_improving));
      CHECK_FALSE(step_sequential_better(g, {0, 0}, i, BetterSelector::max_improving));
    }
  }
  SUBCASE("max_improving coincides with best response whenever it moves") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto g = oracles::random_game(2, {4, 4}, 1000 + seed);
      for (const auto& a : oracles::all_profiles(g)) {
        for (int i = 0; i < 2; ++i) {
          const auto moved = step_sequential_better(g, a, i, BetterSelector::max_improving);
          if (moved.has_value()) CHECK(*moved == step_sequential_best(g, a, i));
        }
      }
    }
  }
  SUBCASE("first_improving picks the lowest improving index") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto g = oracles::random_game(2, {5, 3}, 1100 + seed);
      for (const auto& a : oracles::all_profiles(g)) {
        for (int i = 0; i < 2; ++i) {
          const auto moved = step_sequential_better(g, a, i, BetterSelector::first_improving);
          if (!moved.has_value()) continue;
          const int chosen = (*moved)[static_cast<std::size_t>(i)];
          CHECK(g.utility(i, *moved) > g.utility(i, a));
          for (int q = 0; q < chosen; ++q) {
            if (q == a[static_cast<std::size_t>(i)]) continue;
            IndexProfile alt = a;
            alt[static_cast<std::size_t>(i)] = q;
            CHECK(g.utility(i, alt) <= g.utility(i, a));  // nothing earlier improves
          }
        }
      }
    }
  }
}

TEST_CASE("simultaneous best step") {
  SUBCASE("smooth cournot from the origin") {
    const SmoothGame sg = nominal_game(kParams);
    const Profile next = step_simultaneous_best(sg, {0.0, 0.0});
    CHECK(next[0] == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(next[1] == doctest::Approx(150.0).epsilon(1e-14));
  }
  SUBCASE("cournot NE is a fixed point") {
    const SmoothGame sg = nominal_game(kParams);
    const Profile ne = cournot_ne(kParams);
    const Profile next = step_simultaneous_best(sg, ne);
    CHECK(profile_distance(next, ne) <= 1e-9);
  }
  SUBCASE("matching pennies cycles with period 4") {
    const FiniteGame g = oracles::matching_pennies();
    IndexProfile a = {0, 0};  // (H,H)
    const std::vector<IndexProfile> expected = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
    for (const auto& e : expected) {
      a = step_simultaneous_best(g, a);
      CHECK(a == e);
    }
  }
}

TEST_CASE("iterate") {
  SUBCASE("max_steps below one is rejected") {
    const auto g = oracles::matching_pennies();
    StopSpec stop;
    stop.max_steps = 0;
    CHECK_THROWS_AS(iterate(g, UpdateRule{}, IndexProfile{0, 0}, stop), Error);
  }
  SUBCASE("nominal cournot contracts to the NE from all experiment starts") {
    const SmoothGame sg = nominal_game(kParams);
    const Profile ne = cournot_ne(kParams);
    UpdateRule rule;
    rule.kind = RuleKind::simultaneous_best;
    StopSpec stop;
    stop.max_steps = 60;
    for (const auto& x0 : default_starts(400.0)) {
      const Trajectory traj = iterate(sg, rule, x0, stop);
      CHECK(profile_distance(traj.states.back(), ne) <= 1e-6);
    }
  }
  SUBCASE("potential games terminate at a fixed point under better response") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto np = oracles::random_near_potential_game(2, {4, 4}, 0.0, 2000 + seed);
      UpdateRule rule;
      rule.kind = RuleKind::sequential_better;
      StopSpec stop;
      stop.max_steps = 400;
      const Trajectory traj = iterate(np.game, rule, {0, 0}, stop);
      const auto cyc = detect_cycle(traj);
      REQUIRE(cyc.kind == CycleKind::fixed_point);
      // the potential increases by exactly the mover's gain at every step
      for (std::size_t t = 0; t + 1 < traj.index_states.size(); ++t) {
        const double dphi = np.phi_table[np.game.flat_index(traj.index_states[t + 1])] -
                            np.phi_table[np.game.flat_index(traj.index_states[t])];
        CHECK(dphi == doctest::Approx(traj.steps[t].improvement).epsilon(1e-12));
        if (traj.steps[t].mover >= 0) CHECK(traj.steps[t].improvement > 0.0);
      }
      CHECK(max_deviation_gain(np.game, traj.index_states.back()) <= 0.0);
    }
  }
  SUBCASE("deterministic for identical inputs, including random schedules") {
    const auto g = oracles::random_game(3, {3, 3, 3}, 31);
    UpdateRule rule;
    rule.kind = RuleKind::sequential_better;
    rule.schedule = Schedule::seeded_random_eligible;
    StopSpec stop;
    stop.max_steps = 200;
    const Trajectory a = iterate(g, rule, {0, 1, 2}, stop, 99);
    const Trajectory b = iterate(g, rule, {0, 1, 2}, stop, 99);
    CHECK(trajectories_identical(a, b));
  }
  SUBCASE("w diagnostics match the states") {
    const SmoothGame sg = nominal_game(kParams);
    UpdateRule rule;
    rule.kind = RuleKind::simultaneous_best;
    StopSpec stop;
    stop.max_steps = 40;
    const Trajectory traj = iterate(sg, rule, {0.0, 0.0}, stop);
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
      CHECK(traj.steps[t].w ==
            doctest::Approx(profile_distance(traj.states[t + 1], traj.states[t]))
                .epsilon(1e-12));
      CHECK(traj.steps[t].w >= 0.0);
    }
  }
}

TEST_CASE("detect cycle") {
  SUBCASE("fixed point reported with period 1") {
    const FiniteGame g({{0.0, 1.0}, {0.0, 1.0}}, {{2, 0, 0, 1}, {2, 0, 0, 1}});
    UpdateRule rule;
    const Trajectory traj = iterate(g, rule, {0, 0}, StopSpec{});
    const auto report = detect_cycle(traj);
    CHECK(report.kind == CycleKind::fixed_point);
    CHECK(report.period == 1);
    CHECK(report.cycle_states.front() == IndexProfile{0, 0});
  }
  SUBCASE("matching pennies sequential best response cycles with period 4") {
    const FiniteGame g = oracles::matching_pennies();
    UpdateRule rule;
    rule.kind = RuleKind::sequential_best;
    StopSpec stop;
    stop.max_steps = 50;
    const Trajectory traj = iterate(g, rule, {0, 0}, stop);
    const auto report = detect_cycle(traj);
    REQUIRE(report.kind == CycleKind::cycle);
    CHECK(report.period == 4);
    // (H,H) -> (H,T) -> (T,T) -> (T,H) -> (H,H)
    CHECK(report.cycle_states[0] == IndexProfile{0, 0});
    CHECK(report.cycle_states[1] == IndexProfile{0, 1});
    CHECK(report.cycle_states[2] == IndexProfile{1, 1});
    CHECK(report.cycle_states[3] == IndexProfile{1, 0});
  }
  SUBCASE("pigeonhole budget always resolves") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto np = oracles::random_near_potential_game(2, {3, 3}, 1.0, 3000 + seed);
      UpdateRule rule;
      rule.kind = RuleKind::sequential_better;
      StopSpec stop;
      stop.max_steps = static_cast<int>(np.game.joint_count()) * np.game.players() + 2;
      const Trajectory traj = iterate(np.game, rule, {0, 0}, stop);
      const auto report = detect_cycle(traj);
      CHECK(report.kind != CycleKind::undetermined);
      CHECK(report.period <= static_cast<int>(np.game.joint_count()));
    }
  }
  SUBCASE("smooth trajectories are rejected") {
    const SmoothGame sg = nominal_game(kParams);
    UpdateRule rule;
    rule.kind = RuleKind::simultaneous_best;
    const Trajectory traj = iterate(sg, rule, {0.0, 0.0}, StopSpec{});
    CHECK_THROWS_AS(detect_cycle(traj), Error);
  }
}

TEST_CASE("verify theorem 2") {
  SUBCASE("exact potential game: fixed point, NE, delta 0") {
    const auto np = oracles::random_near_potential_game(2, {3, 3}, 0.0, 4000);
    UpdateRule rule;
    rule.kind = RuleKind::sequential_better;
    StopSpec stop;
    stop.max_steps = 200;
    const Trajectory traj = iterate(np.game, rule, {0, 0}, stop);
    const auto report = verify_theorem2(np.game, np.phi_table, traj);
    REQUIRE(report.resolved);
    CHECK(report.delta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.period == 1);
    CHECK(report.fixed_point_is_ne);
    CHECK(report.holds);
  }
  SUBCASE("near-potential sweep holds with the brute-force oracle") {
    int cycles_seen = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const double mag = 0.05 * static_cast<double>(seed % 8);
      const auto np = oracles::random_near_potential_game(2, {3, 3}, mag, 5000 + seed);
      UpdateRule rule;
      rule.kind = RuleKind::sequential_better;
      StopSpec stop;
      stop.max_steps = static_cast<int>(np.game.joint_count()) * np.game.players() + 2;
      const Trajectory traj = iterate(np.game, rule, {1, 1}, stop);
      const auto report = verify_theorem2(np.game, np.phi_table, traj);
      REQUIRE(report.resolved);
      CHECK(report.holds);
      if (report.period > 1) {
        ++cycles_seen;
        CHECK(report.alpha_inequality_ok);
        for (const auto& w : report.witnesses)
          CHECK(oracles::brute_force_is_eps_ne(np.game, w.state, report.eps_bound));
      }
    }
    (void)cycles_seen;
  }
  SUBCASE("huge perturbation holds trivially") {
    const auto np = oracles::random_near_potential_game(2, {2, 2}, 50.0, 6000);
    UpdateRule rule;
    rule.kind = RuleKind::sequential_better;
    StopSpec stop;
    stop.max_steps = 64;
    const Trajectory traj = iterate(np.game, rule, {0, 0}, stop);
    const auto report = verify_theorem2(np.game, np.phi_table, traj);
    REQUIRE(report.resolved);
    double max_gain = 0.0;
    for (const auto& a : oracles::all_profiles(np.game))
      max_gain = std::max(max_gain, oracles::brute_force_best_gain(np.game, a));
    if (report.period > 1) CHECK(report.eps_bound >= max_gain);
    CHECK(report.holds);
  }
}

TEST_CASE("estimated response iterate") {
  const SmoothGame sg = nominal_game(kParams);
  UpdateRule rule;
  rule.kind = RuleKind::simultaneous_best;

  SUBCASE("zero magnitude reproduces the plain iteration bitwise") {
    EstimatorSpec est;
    est.kind = EstimatorSpec::Kind::geometric;
    est.rho = 0.5;
    est.magnitude = 0.0;
    StopSpec stop;
    stop.max_steps = 50;
    const Trajectory plain = iterate(sg, rule, {0.0, 0.0}, stop, 7);
    const Trajectory noisy = estimated_response_iterate(sg, rule, {0.0, 0.0}, est, 7, 50);
    CHECK(trajectories_identical(plain, noisy));
  }
  SUBCASE("geometric noise still converges to the NE") {
    EstimatorSpec est;
    est.kind = EstimatorSpec::Kind::geometric;
    est.rho = 0.5;
    est.magnitude = 10.0;
    const Trajectory traj = estimated_response_iterate(sg, rule, {0.0, 0.0}, est, 17, 120);
    CHECK(profile_distance(traj.states.back(), cournot_ne(kParams)) <= 1e-4);
  }
  SUBCASE("rho outside (0,1) is rejected") {
    EstimatorSpec est;
    est.kind = EstimatorSpec::Kind::geometric;
    est.rho = 1.5;
    est.magnitude = 1.0;
    CHECK_THROWS_AS(estimated_response_iterate(sg, rule, {0.0, 0.0}, est, 0, 10), Error);
  }
  SUBCASE("harmonic schedule decays as declared") {
    EstimatorSpec est;
    est.kind = EstimatorSpec::Kind::harmonic;
    est.c = 2.0;
    CHECK(est.norm_at(0) == 2.0);
    CHECK(est.norm_at(3) == 0.5);
  }
}
