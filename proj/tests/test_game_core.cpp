#include <cmath>

#include "doctest.h"
#include "gamedyn/cournot.hpp"
#include "gamedyn/game.hpp"
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

FiniteGame two_by_two(std::vector<double> u1, std::vector<double> u2) {
  return FiniteGame({{0.0, 1.0}, {0.0, 1.0}}, {std::move(u1), std::move(u2)});
}

}  // namespace

TEST_CASE("finite game construction validates shapes") {
  CHECK_THROWS_AS(FiniteGame({}, {}), Error);
  CHECK_THROWS_AS(FiniteGame({{0.0, 1.0}}, {{1.0}}), Error);           // short table
  CHECK_THROWS_AS(FiniteGame({{0.0, 0.0}}, {{1.0, 2.0}}), Error);      // duplicate action
  CHECK_THROWS_AS(FiniteGame({{0.0, 1.0}}, {{1.0, 2.0}, {3.0, 4.0}}), Error);  // extra table
  const FiniteGame g = two_by_two({1, 0, 0, 1}, {1, 0, 0, 1});
  CHECK(g.joint_count() == 4);
  CHECK(g.utility(0, {1, 1}) == 1.0);
  CHECK(g.flat_index({1, 0}) == 2);  // player 0 is the slow index
}

TEST_CASE("index snapping") {
  const FiniteGame g = two_by_two({1, 0, 0, 1}, {1, 0, 0, 1});
  CHECK(g.nearest_indices({0.4, 0.9}) == IndexProfile{0, 1});
  CHECK(g.exact_indices({0.0, 1.0}).value() == IndexProfile{0, 1});
  CHECK_FALSE(g.exact_indices({0.4, 1.0}).has_value());
}

TEST_CASE("deviation gain") {
  const FiniteGame g = two_by_two({1, 0, 0, 1}, {1, 0, 0, 1});
  SUBCASE("identity deviation is zero") {
    for (int i = 0; i < 2; ++i)
      for (const auto& a : oracles::all_profiles(g))
        CHECK(deviation_gain(g, i, a, a[static_cast<std::size_t>(i)]) == 0.0);
  }
  SUBCASE("table lookup") {
    CHECK(deviation_gain(g, 0, {0, 0}, 1) == -1.0);
  }
  SUBCASE("cournot direct evaluation") {
    const SmoothGame sg = nominal_game(kParams);
    CHECK(deviation_gain(sg, 0, {0.0, 0.0}, 100.0) == doctest::Approx(10000.0).epsilon(1e-12));
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(deviation_gain(g, 2, {0, 0}, 0), Error);
    CHECK_THROWS_AS(deviation_gain(g, 0, {0, 0}, 5), Error);
  }
}

TEST_CASE("mpd") {
  SUBCASE("identical games give zero") {
    const auto g = oracles::random_game(2, {3, 3}, 7);
    CHECK(mpd(g, g) == 0.0);
  }
  SUBCASE("adding a function of the opponents' actions changes nothing") {
    const auto g = oracles::random_game(2, {2, 3}, 11);
    // u1 += f(a2), u2 += h(a1)
    std::vector<std::vector<double>> tables = {g.utility_table(0), g.utility_table(1)};
    for (int a1 = 0; a1 < 2; ++a1)
      for (int a2 = 0; a2 < 3; ++a2) {
        tables[0][static_cast<std::size_t>(a1 * 3 + a2)] += 10.0 * a2 + 1.0;
        tables[1][static_cast<std::size_t>(a1 * 3 + a2)] += -3.0 * a1 + 0.5;
      }
    const FiniteGame shifted({{0.0, 1.0}, {0.0, 1.0, 2.0}}, std::move(tables));
    CHECK(mpd(g, shifted) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("matches brute force on random pairs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = oracles::random_game(2, {2, 2}, 100 + seed);
      const auto h = oracles::random_game(2, {2, 2}, 200 + seed);
      CHECK(mpd(g, h) == doctest::Approx(oracles::brute_force_mpd(g, h)).epsilon(1e-14));
    }
  }
  SUBCASE("pseudometric on sampled triples") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto a = oracles::random_game(2, {3, 2}, 300 + seed);
      const auto b = oracles::random_game(2, {3, 2}, 400 + seed);
      const auto c = oracles::random_game(2, {3, 2}, 500 + seed);
      CHECK(mpd(a, b) >= 0.0);
      CHECK(mpd(a, b) == doctest::Approx(mpd(b, a)).epsilon(1e-14));
      CHECK(mpd(a, c) <= mpd(a, b) + mpd(b, c) + 1e-12);
    }
  }
  SUBCASE("shape mismatch rejected") {
    const auto g = oracles::random_game(2, {2, 2}, 1);
    const auto h = oracles::random_game(2, {2, 3}, 1);
    CHECK_THROWS_AS(mpd(g, h), Error);
  }
}

TEST_CASE("potential residual") {
  SUBCASE("discretized cournot with its closed-form potential is exact") {
    // grid kept inside the P > 0 region, where the potential identity holds
    const FiniteGame g = discretized_cournot(21, 150.0);
    std::vector<double> phi(g.joint_count());
    for (std::size_t f = 0; f < g.joint_count(); ++f)
      phi[f] = cournot_potential(kParams, g.coords(g.unflatten(f)));
    CHECK(potential_residual(g, phi) <= 1e-9);
  }
  SUBCASE("zero potential collapses to the max absolute gain") {
    const auto g = oracles::random_game(2, {3, 3}, 42);
    std::vector<double> zero(g.joint_count(), 0.0);
    double expected = 0.0;
    for (const auto& a : oracles::all_profiles(g))
      for (int i = 0; i < 2; ++i)
        for (int q = 0; q < 3; ++q) {
          IndexProfile alt = a;
          alt[static_cast<std::size_t>(i)] = q;
          expected = std::max(expected, std::abs(g.utility(i, alt) - g.utility(i, a)));
        }
    CHECK(potential_residual(g, zero) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("bounded perturbation keeps the residual under twice its sup") {
    const FiniteGame base = discretized_cournot(9, 150.0);
    std::vector<double> phi(base.joint_count());
    for (std::size_t f = 0; f < base.joint_count(); ++f)
      phi[f] = cournot_potential(kParams, base.coords(base.unflatten(f)));

    const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
    const Evaluator du = [&bump](const Profile& a) { return bump.delta_u(a); };
    const auto pg = PerturbedFiniteGame::from_evaluators(base, {du, du});

    double sup_du = 0.0;
    for (const auto& a : oracles::all_profiles(base))
      sup_du = std::max(sup_du, std::abs(bump.delta_u(base.coords(a))));
    CHECK(potential_residual(pg.perturbed(), phi) <= 2.0 * sup_du + 1e-9);
  }
  SUBCASE("shape mismatch rejected") {
    const auto g = oracles::random_game(2, {2, 2}, 5);
    CHECK_THROWS_AS(potential_residual(g, std::vector<double>(3, 0.0)), Error);
  }
}

TEST_CASE("epsilon NE set") {
  SUBCASE("negative epsilon rejected") {
    const auto g = oracles::matching_pennies();
    CHECK_THROWS_AS(epsilon_ne_set(g, -0.1), Error);
  }
  SUBCASE("matching pennies has no pure NE") {
    CHECK(epsilon_ne_set(oracles::matching_pennies(), 0.0).empty());
  }
  SUBCASE("large epsilon covers the whole space") {
    const auto g = oracles::random_game(2, {3, 3}, 9);
    double max_gain = 0.0;
    for (const auto& a : oracles::all_profiles(g))
      max_gain = std::max(max_gain, oracles::brute_force_best_gain(g, a));
    CHECK(epsilon_ne_set(g, max_gain).size() == g.joint_count());
  }
  SUBCASE("grid near the closed-form cournot NE enters the slack set") {
    const FiniteGame g = discretized_cournot(31, 150.0);  // grid spacing 5
    const Profile ne = cournot_ne(kParams);               // (100/3, 400/3)
    CHECK(ne[0] == doctest::Approx(100.0 / 3.0));
    CHECK(ne[1] == doctest::Approx(400.0 / 3.0));
    const IndexProfile snapped = g.nearest_indices(ne);
    const double slack = oracles::brute_force_best_gain(g, snapped);
    CHECK(slack < 30.0);  // grid-induced slack only
    const auto set = epsilon_ne_set(g, slack);
    bool found = false;
    for (const auto& a : set) found = found || a == snapped;
    CHECK(found);
  }
  SUBCASE("monotone in epsilon on random games") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = oracles::random_game(2, {3, 3}, 600 + seed);
      const auto small = epsilon_ne_set(g, 0.1);
      const auto large = epsilon_ne_set(g, 0.5);
      CHECK(small.size() <= large.size());
      for (const auto& a : small) {
        bool found = false;
        for (const auto& b : large) found = found || a == b;
        CHECK(found);
      }
    }
  }
  SUBCASE("agrees with the brute-force membership oracle") {
    const auto g = oracles::random_game(3, {2, 2, 2}, 77);
    for (double eps : {0.0, 0.2, 0.7}) {
      const auto set = epsilon_ne_set(g, eps);
      std::size_t count = 0;
      for (const auto& a : oracles::all_profiles(g))
        if (oracles::brute_force_is_eps_ne(g, a, eps)) ++count;
      CHECK(set.size() == count);
    }
  }
}

TEST_CASE("nu") {
  const SmoothGame sg = nominal_game(kParams);
  SUBCASE("zero at the NE") {
    CHECK(nu(sg, cournot_ne(kParams)) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("closed-form value at the origin") {
    // player 1 gains 10000 at a1=100, player 2 gains 22500 at a2=150
    CHECK(nu(sg, {0.0, 0.0}) == doctest::Approx(-22500.0).epsilon(1e-12));
  }
  SUBCASE("membership equivalence with the eps-NE set on a grid") {
    SmoothGame gridded = nominal_game(kParams);
    gridded.set_action_grid(0, oracles::linspace(0.0, 150.0, 16));
    gridded.set_action_grid(1, oracles::linspace(0.0, 150.0, 16));
    const FiniteGame fg = gridded.discretize();
    const double eps = 500.0;
    for (const auto& a : oracles::all_profiles(fg)) {
      const bool via_nu = nu(gridded, fg.coords(a)) >= -eps;
      CHECK(via_nu == oracles::brute_force_is_eps_ne(fg, a, eps));
    }
  }
  SUBCASE("lipschitz in x with constant at most L0") {
    const double l0 = 2.0 * std::max(cournot_utility_lipschitz(kParams, 0, sg.box()),
                                     cournot_utility_lipschitz(kParams, 1, sg.box()));
    Rng rng(321);
    for (int rep = 0; rep < 50; ++rep) {
      const Profile x = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
      const Profile y = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
      CHECK(std::abs(nu(sg, x) - nu(sg, y)) <= l0 * profile_distance(x, y) + 1e-9);
    }
  }
}

TEST_CASE("lipschitz estimate") {
  SUBCASE("constant function") {
    const Box box{{0.0}, {1.0}};
    CHECK(lipschitz_estimate([](const Profile&) { return 3.0; }, box, 32, 1) == 0.0);
  }
  SUBCASE("affine cases") {
    const Box box{{0.0}, {1.0}};
    CHECK(lipschitz_estimate([](const Profile& x) { return x[0]; }, box, 64, 1) ==
          doctest::Approx(1.0).epsilon(1e-6));
    const Box wide{{0.0}, {400.0}};
    const CournotParams p = kParams;
    CHECK(lipschitz_estimate([p](const Profile& x) { return (p.d - x[0] - p.c1) / 2.0; }, wide,
                             64, 2) == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("declared bounds are never exceeded by sampled estimates") {
    const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
    const Box box{{0.0, 0.0}, {400.0, 400.0}};
    const double declared = delta1_bound(bump, box) / std::sqrt(2.0);  // per-player bound
    const double sampled =
        lipschitz_estimate([&bump](const Profile& a) { return bump.delta_u(a); }, box, 256, 3);
    CHECK(sampled <= declared);
  }
  SUBCASE("degenerate box and bad sample count rejected") {
    CHECK_THROWS_AS(lipschitz_estimate([](const Profile&) { return 0.0; }, Box{{0.0}, {0.0}}, 8, 0),
                    Error);
    CHECK_THROWS_AS(lipschitz_estimate([](const Profile&) { return 0.0; }, Box{{0.0}, {1.0}}, 1, 0),
                    Error);
  }
}

TEST_CASE("perturbed game wrappers") {
  SUBCASE("finite: perturbed utilities equal base plus delta everywhere") {
    const auto base = oracles::random_game(2, {3, 2}, 15);
    const SigmoidBumpPerturbation bump{1.0, 1.0};
    const Evaluator du = [&bump](const Profile& a) { return bump.delta_u(a); };
    const auto pg = PerturbedFiniteGame::from_evaluators(base, {du, du});
    for (const auto& a : oracles::all_profiles(base))
      for (int i = 0; i < 2; ++i)
        CHECK(pg.perturbed().utility(i, a) ==
              base.utility(i, a) + bump.delta_u(base.coords(a)));
  }
  SUBCASE("smooth: same identity through evaluators") {
    const SmoothGame base = nominal_game(kParams);
    const SigmoidBumpPerturbation bump{50.0, 50.0};
    const Evaluator du = [&bump](const Profile& a) { return bump.delta_u(a); };
    const PerturbedSmoothGame pg(base, {du, du});
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
      const Profile a = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
      for (int i = 0; i < 2; ++i)
        CHECK(pg.perturbed().utility(i, a) ==
              doctest::Approx(base.utility(i, a) + bump.delta_u(a)).epsilon(1e-14));
    }
  }
}
