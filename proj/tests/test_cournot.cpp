#include <cmath>

#include "doctest.h"
#include "gamedyn/cournot.hpp"
#include "oracles.hpp"

using namespace gamedyn;

namespace {

const CournotParams kParams{400.0, 200.0, 100.0, 400.0};
const Box kBox{{0.0, 0.0}, {400.0, 400.0}};

// grid maximization of ||grad du|| over [0,400]^2 at 400/axis, 1.05 safety
constexpr double kGoldenDelta1 = 1.203191945755351;

double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo >= 0.0) == (fm >= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("cournot utility") {
  SUBCASE("zero quantity earns nothing") {
    CHECK(cournot_utility(kParams, 0, {0.0, 123.0}) == 0.0);
  }
  SUBCASE("worked value") {
    CHECK(cournot_utility(kParams, 0, {100.0, 150.0}) == doctest::Approx(-5000.0));
  }
  SUBCASE("price floor branch") {
    // a1 + a2 > d collapses the price to zero, so u_i = -a_i c_i
    CHECK(cournot_utility(kParams, 0, {300.0, 200.0}) == doctest::Approx(-300.0 * 200.0));
    CHECK(cournot_utility(kParams, 1, {300.0, 200.0}) == doctest::Approx(-200.0 * 100.0));
  }
  SUBCASE("parameter validation") {
    const CournotParams demand_below_cost{100.0, 200.0, 50.0, 400.0};
    const CournotParams negative_cost{400.0, -1.0, 50.0, 400.0};
    const CournotParams empty_box{400.0, 10.0, 50.0, 0.0};
    CHECK_THROWS_AS(demand_below_cost.validate(), Error);
    CHECK_THROWS_AS(negative_cost.validate(), Error);
    CHECK_THROWS_AS(empty_box.validate(), Error);
  }
}

TEST_CASE("nominal best response") {
  SUBCASE("origin maps to (100, 150)") {
    const Profile next = nominal_br_step(kParams, {0.0, 0.0});
    CHECK(next[0] == 100.0);
    CHECK(next[1] == 150.0);
  }
  SUBCASE("closed-form NE is a fixed point") {
    const Profile ne = cournot_ne(kParams);
    CHECK(profile_distance(nominal_br_step(kParams, ne), ne) <= 1e-12);
  }
  SUBCASE("clip branch activates when the opponent floods the market") {
    CHECK(nominal_br_action(kParams, 0, {0.0, 250.0}) == 0.0);  // d - c1 = 200 < 250
  }
  SUBCASE("contraction factor one half on unclipped pairs") {
    Rng rng(41);
    for (int rep = 0; rep < 100; ++rep) {
      const Profile x = {rng.uniform(0.0, 180.0), rng.uniform(0.0, 120.0)};
      const Profile y = {rng.uniform(0.0, 180.0), rng.uniform(0.0, 120.0)};
      const double lhs = profile_distance(nominal_br_step(kParams, x),
                                          nominal_br_step(kParams, y));
      CHECK(lhs <= 0.5 * profile_distance(x, y) + 1e-12);
    }
  }
  SUBCASE("clipping keeps the map nonexpansive at factor one half") {
    Rng rng(43);
    for (int rep = 0; rep < 100; ++rep) {
      const Profile x = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
      const Profile y = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
      const double lhs = profile_distance(nominal_br_step(kParams, x),
                                          nominal_br_step(kParams, y));
      CHECK(lhs <= 0.5 * profile_distance(x, y) + 1e-12);
    }
  }
}

TEST_CASE("cournot potential") {
  SUBCASE("zero at the origin") {
    CHECK(cournot_potential(kParams, {0.0, 0.0}) == 0.0);
  }
  SUBCASE("unilateral increments match utility increments on the interior") {
    Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
      // stay inside the P > 0 region
      const Profile a = {rng.uniform(0.0, 150.0), rng.uniform(0.0, 150.0)};
      const int player = static_cast<int>(rng.below(2));
      Profile b = a;
      b[static_cast<std::size_t>(player)] = rng.uniform(0.0, 150.0);
      const double du = cournot_utility(kParams, player, b) - cournot_utility(kParams, player, a);
      const double dphi = cournot_potential(kParams, b) - cournot_potential(kParams, a);
      CHECK(du == doctest::Approx(dphi).epsilon(1e-9));
    }
  }
  SUBCASE("symmetric costs: argmax and value in closed form") {
    const CournotParams sym{400.0, 150.0, 150.0, 400.0};
    const double c = 150.0;
    const double at = (sym.d - c) / 3.0;
    const double value = (sym.d - c) * (sym.d - c) / 3.0;
    CHECK(cournot_potential(sym, {at, at}) == doctest::Approx(value).epsilon(1e-12));
    // nearby points do not beat it
    for (double eps1 : {-1.0, 0.0, 1.0})
      for (double eps2 : {-1.0, 0.0, 1.0})
        CHECK(cournot_potential(sym, {at + eps1, at + eps2}) <= value + 1e-9);
  }
}

TEST_CASE("taylor bound M") {
  const CournotParams sym{400.0, 150.0, 150.0, 400.0};
  SUBCASE("square box closed form") {
    const double abar = 10.0;
    const double expected = std::abs((sym.d - 150.0) * abar * abar * abar -
                                     11.0 / 12.0 * abar * abar * abar * abar);
    CHECK(taylor_M(sym, abar, abar) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("vanishing box") {
    CHECK(taylor_M(sym, 1e-9, 1e-9) == doctest::Approx(0.0));
  }
  SUBCASE("general formula reduces to the square-box case") {
    for (double abar : {0.5, 2.0, 7.5, 40.0}) {
      const double special = std::abs((sym.d - 150.0) * std::pow(abar, 3) -
                                      11.0 / 12.0 * std::pow(abar, 4));
      CHECK(taylor_M(sym, abar, abar) ==
            doctest::Approx(special).epsilon(1e-12).scale(std::max(1.0, special)));
    }
  }
  SUBCASE("asymmetric costs use the averaged cost unless overridden") {
    CHECK(taylor_M(kParams, 5.0, 5.0) ==
          doctest::Approx(taylor_M(kParams, 5.0, 5.0, (kParams.c1 + kParams.c2) / 2.0)));
    CHECK(taylor_M(kParams, 5.0, 5.0, kParams.c1) != taylor_M(kParams, 5.0, 5.0, kParams.c2));
  }
}

TEST_CASE("perturbation gradients") {
  const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
  SUBCASE("zero at the bump center") {
    const auto g = bump.half_gradients({bump.mu1, bump.mu2});
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
  }
  SUBCASE("value range of the perturbation") {
    CHECK(bump.delta_u({bump.mu1, bump.mu2}) == doctest::Approx(0.5));
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
      const double v = bump.delta_u({rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)});
      CHECK(v >= 0.5);
      CHECK(v <= 1.0);  // saturates at 1 once exp(-s^2) underflows
    }
    // strictly below 1 wherever exp(-s^2) stays above machine epsilon
    for (double r : {0.5, 1.0, 1.5, 2.0})
      CHECK(bump.delta_u({bump.mu1 + r, bump.mu2}) < 1.0);
  }
  SUBCASE("half gradients match central differences on a 50x50 grid") {
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 50; ++j) {
        const double a1 = 400.0 * i / 49, a2 = 400.0 * j / 49;
        const auto g = bump.half_gradients({a1, a2});
        const double fd1 = oracles::central_difference(
            [&](double x) { return bump.delta_u({x, a2}); }, a1);
        const double fd2 = oracles::central_difference(
            [&](double x) { return bump.delta_u({a1, x}); }, a2);
        CHECK(g[0] == doctest::Approx(0.5 * fd1).epsilon(1e-6).scale(1.0));
        CHECK(g[1] == doctest::Approx(0.5 * fd2).epsilon(1e-6).scale(1.0));
      }
    }
  }
  SUBCASE("gradient norm decays monotonically along a distant ray") {
    double prev = 1e300;
    for (double r = 2.0; r <= 40.0; r += 1.0) {
      const auto g = bump.gradient({bump.mu1 + r, bump.mu2});
      const double norm = std::hypot(g[0], g[1]);
      CHECK(norm <= prev + 1e-18);
      prev = norm;
    }
    CHECK(prev == 0.0);  // fully underflowed far away
  }
}

TEST_CASE("perturbed best response root solve") {
  const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
  SUBCASE("inactive perturbation reduces to the nominal closed form") {
    const SigmoidBumpPerturbation far{1e9, 1e9};  // gradient underflows to zero
    Rng rng(23);
    for (int rep = 0; rep < 50; ++rep) {
      const Profile a = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
      const Profile solved = perturbed_br_step(kParams, far, a);
      const Profile nominal = nominal_br_step(kParams, a);
      CHECK(profile_distance(solved, nominal) <= 1e-12);
    }
  }
  SUBCASE("plug-back residual stays within 1e-9") {
    Rng rng(29);
    for (int rep = 0; rep < 200; ++rep) {
      const Profile a = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
      for (int player = 0; player < 2; ++player) {
        const auto r = perturbed_br_action(kParams, bump, player, a);
        if (r.clamped) continue;
        CHECK(r.residual <= 1e-9);
      }
    }
  }
  SUBCASE("agrees with an independent bisection-only solve") {
    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
      const Profile a = {rng.uniform(0.0, 300.0), rng.uniform(0.0, 300.0)};
      for (int player = 0; player < 2; ++player) {
        const auto newton = perturbed_br_action(kParams, bump, player, a);
        const double other = a[static_cast<std::size_t>(1 - player)];
        const auto residual = [&](double z) {
          Profile probe(2);
          probe[static_cast<std::size_t>(player)] = z;
          probe[static_cast<std::size_t>(1 - player)] = other;
          return -z + (kParams.d - other - kParams.cost(player)) / 2.0 +
                 bump.half_gradients(probe)[static_cast<std::size_t>(player)];
        };
        if (newton.clamped) {
          CHECK(residual(0.0) < 0.0);
          continue;
        }
        const double by_bisection = bisect_root(residual, 0.0, kParams.d);
        CHECK(newton.root == doctest::Approx(by_bisection).epsilon(1e-9));
      }
    }
  }
  SUBCASE("origin step with the bump at the NE") {
    const auto r0 = perturbed_br_action(kParams, bump, 0, {0.0, 0.0});
    const auto r1 = perturbed_br_action(kParams, bump, 1, {0.0, 0.0});
    CHECK_FALSE(r0.clamped);
    CHECK_FALSE(r1.clamped);
    CHECK(r0.residual <= 1e-9);
    CHECK(r1.residual <= 1e-9);
    // far from mu the gradient vanishes, so the roots sit at the nominal values
    CHECK(r0.root == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(r1.root == doctest::Approx(150.0).epsilon(1e-9));
  }
  SUBCASE("flooded market clamps to zero") {
    const auto r = perturbed_br_action(kParams, bump, 0, {0.0, 400.0});
    CHECK(r.clamped);
    CHECK(r.root == 0.0);
  }
}

TEST_CASE("delta1 bound") {
  SUBCASE("inactive perturbation gives zero") {
    const SigmoidBumpPerturbation far{1e9, 1e9};
    CHECK(delta1_bound(far, kBox) == 0.0);
  }
  SUBCASE("identical perturbations: delta1 = sqrt(2) L") {
    const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
    const double d1 = delta1_bound(bump, kBox);
    double grid_max = 0.0;
    for (int i = 0; i < 400; ++i)
      for (int j = 0; j < 400; ++j) {
        const auto g = bump.gradient({400.0 * i / 399, 400.0 * j / 399});
        grid_max = std::max(grid_max, std::hypot(g[0], g[1]));
      }
    CHECK(d1 == doctest::Approx(std::sqrt(2.0) * 1.05 * grid_max).epsilon(1e-12));
  }
  SUBCASE("experiment golden constant") {
    const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
    CHECK(delta1_bound(bump, kBox) == doctest::Approx(kGoldenDelta1).epsilon(1e-9));
  }
}

TEST_CASE("experiment harness") {
  SUBCASE("default starts form the 3x3 grid minus its center") {
    const auto starts = default_starts(400.0);
    REQUIRE(starts.size() == 8);
    for (const auto& s : starts) {
      CHECK((s[0] == 0.0 || s[0] == 200.0 || s[0] == 400.0));
      CHECK((s[1] == 0.0 || s[1] == 200.0 || s[1] == 400.0));
      CHECK_FALSE((s[0] == 200.0 && s[1] == 200.0));
    }
  }
  SUBCASE("repeated mode: nominal convergence and perturbed trapping") {
    CournotExperimentConfig config;
    config.mode = CournotMode::repeated;
    const auto report = run_experiment(config);
    CHECK(report.delta1 == doctest::Approx(kGoldenDelta1).epsilon(1e-9));
    CHECK(report.radius == doctest::Approx(2.0 * kGoldenDelta1).epsilon(1e-9));
    REQUIRE(report.nominal.size() == 8);
    REQUIRE(report.perturbed.size() == 8);
    for (std::size_t s = 0; s < 8; ++s) {
      CHECK(profile_distance(report.nominal[s].states.back(), report.x_tilde) <= 1e-6);
      REQUIRE(report.perturbed_trap[s].all_inside_after.has_value());
      CHECK(*report.perturbed_trap[s].all_inside_after <= 200);
      CHECK(report.perturbed_trap[s].max_tail_distance <= report.radius);
    }
  }
  SUBCASE("sequential mode reaches the same trap radius") {
    CournotExperimentConfig config;
    config.mode = CournotMode::sequential;
    const auto report = run_experiment(config);
    for (std::size_t s = 0; s < 8; ++s) {
      REQUIRE(report.perturbed_trap[s].all_inside_after.has_value());
      CHECK(report.perturbed_trap[s].max_tail_distance <= report.radius);
    }
  }
  SUBCASE("runs are deterministic") {
    CournotExperimentConfig config;
    config.max_steps = 40;
    const auto a = run_experiment(config);
    const auto b = run_experiment(config);
    REQUIRE(a.perturbed.size() == b.perturbed.size());
    for (std::size_t s = 0; s < a.perturbed.size(); ++s) {
      CHECK(a.perturbed[s].states == b.perturbed[s].states);
      CHECK(a.nominal[s].states == b.nominal[s].states);
    }
    CHECK(a.delta1 == b.delta1);
  }
  SUBCASE("taylor residuals are populated on experiment trajectories") {
    CournotExperimentConfig config;
    config.max_steps = 30;
    const auto report = run_experiment(config);
    const auto& traj = report.nominal.front();  // from (0,0): both coords move
    REQUIRE(traj.steps.size() >= 2);
    CHECK(traj.steps[1].k > 0.0);
    // k equals |da1 * da2| for the cournot potential
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
      const double expected = std::abs((traj.states[t + 1][0] - traj.states[t][0]) *
                                       (traj.states[t + 1][1] - traj.states[t][1]));
      CHECK(traj.steps[t].k ==
            doctest::Approx(expected).epsilon(1e-9).scale(std::max(1.0, expected)));
    }
  }
}

TEST_CASE("lipschitz constant of the utilities") {
  SUBCASE("vertex maximization dominates dense sampling") {
    for (int player = 0; player < 2; ++player) {
      const double analytic = cournot_utility_lipschitz(kParams, player, kBox);
      double sampled = 0.0;
      Rng rng(71);
      for (int rep = 0; rep < 4000; ++rep) {
        const Profile x = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
        const Profile y = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
        const double dx = profile_distance(x, y);
        if (dx < 1e-9) continue;
        sampled = std::max(sampled, std::abs(cournot_utility(kParams, player, x) -
                                             cournot_utility(kParams, player, y)) /
                                        dx);
      }
      CHECK(sampled <= analytic + 1e-9);
    }
  }
  SUBCASE("small interior box reduces to the gradient at its corners") {
    const Box small{{0.0, 0.0}, {10.0, 10.0}};
    const double analytic = cournot_utility_lipschitz(kParams, 0, small);
    // on this box the P=0 piece is empty and the gradient peaks at the origin
    CHECK(analytic == doctest::Approx(kParams.d - kParams.c1).epsilon(1e-12));
  }
}
