#include "gamedyn/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "gamedyn/contraction.hpp"
#include "gamedyn/cournot.hpp"
#include "gamedyn/invariants.hpp"
#include "gamedyn/rng.hpp"
#include "gamedyn/serialize.hpp"

namespace gamedyn {

namespace {

const CournotParams kParams{400.0, 200.0, 100.0, 400.0};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

SmoothGame perturbed_discretized_cournot(int points, double a_max) {
  const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
  const CournotParams p = kParams;
  Box box{{0.0, 0.0}, {a_max, a_max}};
  std::vector<Evaluator> utilities = {
      [p, bump](const Profile& a) { return cournot_utility(p, 0, a) + bump.delta_u(a); },
      [p, bump](const Profile& a) { return cournot_utility(p, 1, a) + bump.delta_u(a); }};
  SmoothGame game(box, std::move(utilities));
  game.set_action_grid(0, linspace(0.0, a_max, points));
  game.set_action_grid(1, linspace(0.0, a_max, points));
  return game;
}

/// u_i = phi + h_i(a_-i) + bounded perturbation; exact potential at zero
/// magnitude.
struct NearPotentialGame {
  FiniteGame game;
  std::vector<double> phi;
};

NearPotentialGame make_near_potential(int players, int actions, double magnitude,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> sets(static_cast<std::size_t>(players));
  for (auto& s : sets)
    for (int q = 0; q < actions; ++q) s.push_back(static_cast<double>(q));
  std::size_t joint = 1;
  for (int i = 0; i < players; ++i) joint *= static_cast<std::size_t>(actions);
  std::vector<std::size_t> strides(static_cast<std::size_t>(players), 1);
  for (int i = players - 2; i >= 0; --i)
    strides[static_cast<std::size_t>(i)] =
        strides[static_cast<std::size_t>(i) + 1] * static_cast<std::size_t>(actions);

  std::vector<double> phi(joint);
  for (auto& v : phi) v = rng.uniform(-1.0, 1.0);
  std::vector<std::vector<double>> h(static_cast<std::size_t>(players),
                                     std::vector<double>(joint));
  for (auto& hi : h)
    for (auto& v : hi) v = rng.uniform(-1.0, 1.0);

  std::vector<std::vector<double>> tables(static_cast<std::size_t>(players),
                                          std::vector<double>(joint));
  for (std::size_t flat = 0; flat < joint; ++flat) {
    for (int i = 0; i < players; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const std::size_t idx_i = (flat / strides[u]) % static_cast<std::size_t>(actions);
      const std::size_t flat_minus_i = flat - idx_i * strides[u];
      tables[u][flat] = phi[flat] + h[u][flat_minus_i] + magnitude * rng.uniform(-1.0, 1.0);
    }
  }
  return {FiniteGame(std::move(sets), std::move(tables)), std::move(phi)};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// --- individual checks ---------------------------------------------------

CheckResult check_cournot_nominal_convergence() {
  CheckResult r{"cournot_nominal_convergence", true, "", 0.0};
  const Profile ne = cournot_ne(kParams);
  double worst = 0.0;
  int worst_steps = 0;
  for (const auto& x0 : default_starts(kParams.a_bar)) {
    const Trajectory traj = run_cournot_dynamics(kParams, nullptr, x0, CournotMode::repeated, 60);
    int reached = -1;
    for (int t = 0; t < traj.length(); ++t) {
      if (profile_distance(traj.states[static_cast<std::size_t>(t)], ne) <= 1e-6) {
        reached = t;
        break;
      }
    }
    if (reached < 0) {
      r.pass = false;
      r.detail = "start (" + fmt(x0[0]) + ", " + fmt(x0[1]) + ") missed the NE in 60 steps";
      return r;
    }
    worst = std::max(worst, profile_distance(traj.states.back(), ne));
    worst_steps = std::max(worst_steps, reached);
  }
  r.detail = "8 starts reach (100/3, 400/3) within 1e-6 by step " + std::to_string(worst_steps) +
             "; final distance <= " + fmt(worst);
  return r;
}

CheckResult check_cournot_trap(CournotMode mode) {
  CheckResult r{mode == CournotMode::repeated ? "cournot_trap_repeated" : "cournot_trap_sequential",
                true, "", 0.0};
  CournotExperimentConfig config;
  config.mode = mode;
  const CournotExperimentReport report = run_experiment(config);
  int latest_entry = 0;
  double worst_tail = 0.0;
  for (std::size_t s = 0; s < report.starts.size(); ++s) {
    const auto& trap = report.perturbed_trap[s];
    if (!trap.all_inside_after.has_value() || *trap.all_inside_after > 200 ||
        trap.max_tail_distance > report.radius) {
      r.pass = false;
      r.detail = "perturbed trajectory " + std::to_string(s) + " escapes N_{2 delta1}";
      return r;
    }
    latest_entry = std::max(latest_entry, *trap.all_inside_after);
    worst_tail = std::max(worst_tail, trap.max_tail_distance);
    if (profile_distance(report.nominal[s].states.back(), report.x_tilde) > 1e-6) {
      r.pass = false;
      r.detail = "nominal trajectory " + std::to_string(s) + " did not converge";
      return r;
    }
  }
  r.detail = "8 perturbed tails inside radius " + fmt(report.radius) + " (delta1 " +
             fmt(report.delta1) + ") from step <= " + std::to_string(latest_entry) +
             ", max tail distance " + fmt(worst_tail);
  return r;
}

CheckResult check_theorem2_sweep() {
  CheckResult r{"theorem2_sweep", true, "", 0.0};
  const double magnitudes[] = {0.0, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.5};
  int fixed_points = 0, cycles = 0;
  for (int i = 0; i < 100; ++i) {
    const int players = 2 + i % 2;
    const int actions = 2 + (i / 2) % 3;
    const double mag = magnitudes[i % 8];
    const NearPotentialGame np =
        make_near_potential(players, actions, mag, 0xC0FFEE00ULL + static_cast<std::uint64_t>(i));

    UpdateRule rule;
    rule.kind = RuleKind::sequential_better;
    rule.schedule = i % 3 == 0 ? Schedule::seeded_random_eligible : Schedule::round_robin_eligible;
    StopSpec stop;
    stop.max_steps = static_cast<int>(np.game.joint_count()) * np.game.players() * 4 + 2;
    const IndexProfile x0(static_cast<std::size_t>(players), 0);
    const Trajectory traj =
        iterate(np.game, rule, x0, stop, 0xFACEULL + static_cast<std::uint64_t>(i));

    const Theorem2Report report = verify_theorem2(np.game, np.phi, traj);
    if (!report.resolved || !report.holds) {
      r.pass = false;
      r.detail = "game " + std::to_string(i) + " (mag " + fmt(mag) +
                 (report.resolved ? "): claim failed" : "): unresolved trajectory");
      return r;
    }
    (report.period == 1 ? fixed_points : cycles) += 1;
  }
  r.detail = "100 games: " + std::to_string(fixed_points) + " NE fixed points, " +
             std::to_string(cycles) + " cycles inside X_{delta |A|}, zero counterexamples";
  return r;
}

CheckResult check_exact_potential_identities() {
  CheckResult r{"exact_potential_identities", true, "", 0.0};
  SmoothGame sg = perturbed_discretized_cournot(31, 150.0);
  // unperturbed tables for the identity: rebuild without the bump
  const CournotParams p = kParams;
  Box box{{0.0, 0.0}, {150.0, 150.0}};
  std::vector<Evaluator> utilities = {
      [p](const Profile& a) { return cournot_utility(p, 0, a); },
      [p](const Profile& a) { return cournot_utility(p, 1, a); }};
  SmoothGame nominal(box, std::move(utilities));
  nominal.set_action_grid(0, linspace(0.0, 150.0, 31));
  nominal.set_action_grid(1, linspace(0.0, 150.0, 31));
  const FiniteGame table = nominal.discretize();
  std::vector<double> phi(table.joint_count());
  for (std::size_t f = 0; f < table.joint_count(); ++f)
    phi[f] = cournot_potential(p, table.coords(table.unflatten(f)));

  const double residual = potential_residual(table, phi);
  if (residual > 1e-9) {
    r.pass = false;
    r.detail = "discretized residual " + fmt(residual) + " exceeds 1e-9";
    return r;
  }

  Rng rng(0xBEEF);
  double worst = 0.0;
  for (int rep = 0; rep < 10000; ++rep) {
    const Profile a = {rng.uniform(0.0, 150.0), rng.uniform(0.0, 150.0)};
    const int player = static_cast<int>(rng.below(2));
    Profile b = a;
    b[static_cast<std::size_t>(player)] = rng.uniform(0.0, 150.0);
    const double du = cournot_utility(p, player, b) - cournot_utility(p, player, a);
    const double dphi = cournot_potential(p, b) - cournot_potential(p, a);
    worst = std::max(worst, std::abs(du - dphi));
  }
  if (worst > 1e-9) {
    r.pass = false;
    r.detail = "interior deviation mismatch " + fmt(worst) + " exceeds 1e-9";
    return r;
  }
  r.detail = "residual " + fmt(residual) + "; 10^4 interior deviations match to " + fmt(worst);
  return r;
}

CheckResult check_lemma6_theorem4() {
  CheckResult r{"lemma6_theorem4", true, "", 0.0};
  SmoothGame sg = perturbed_discretized_cournot(41, 150.0);
  const FiniteGame table = sg.discretize();
  std::vector<double> phi_table(table.joint_count());
  for (std::size_t f = 0; f < table.joint_count(); ++f)
    phi_table[f] = cournot_potential(kParams, table.coords(table.unflatten(f)));
  const double delta = potential_residual(table, phi_table);

  UpdateRule rule;
  rule.kind = RuleKind::simultaneous_best;
  StopSpec stop;
  stop.max_steps = 120;

  int entries = 0;
  for (const IndexProfile& x0 : {IndexProfile{0, 0}, IndexProfile{40, 40}}) {
    const Trajectory traj = iterate(table, rule, x0, stop);
    const Lemma6Report l6 = lemma6_check(table, traj, phi_table, delta, 1.0);
    if (!l6.violations.empty()) {
      r.pass = false;
      r.detail = "lemma 6 violated at step " + std::to_string(l6.violations.front().t);
      return r;
    }
  }

  const Evaluator phi = [](const Profile& a) { return cournot_potential(kParams, a); };
  const Trajectory smooth_traj = iterate(sg, rule, {0.0, 0.0}, stop);
  const InvariantSetSpec spec =
      build_invariant_set(sg, phi, smooth_traj, 3, 1.0, TailMode::sup, 200);
  const Theorem4Report t4 = theorem4_verify(sg, phi, smooth_traj, spec);
  if (!t4.entry_index.has_value() || !t4.post_entry_violations.empty() ||
      !t4.first_r4_visit.has_value()) {
    r.pass = false;
    r.detail = "theorem 4 entry or containment failed";
    return r;
  }
  entries = *t4.entry_index;
  r.detail = "zero lemma-6 violations; C entry at t=" + std::to_string(entries) +
             " with zero post-entry violations at grid 200^2 (delta " + fmt(delta) + ")";
  return r;
}

CheckResult check_taylor_exactness() {
  CheckResult r{"taylor_exactness", true, "", 0.0};
  const Evaluator phi = [](const Profile& a) { return cournot_potential(kParams, a); };
  Rng rng(0xABCD);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Profile x = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
    const Profile y = {rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0)};
    const double expected = std::abs((y[0] - x[0]) * (y[1] - x[1]));
    const double got = taylor_residual_k(phi, x, y);
    const double err = std::abs(got - expected) / std::max(1.0, expected);
    worst_rel = std::max(worst_rel, err);
  }
  if (worst_rel > 1e-9) {
    r.pass = false;
    r.detail = "cross-term mismatch " + fmt(worst_rel);
    return r;
  }
  r.detail = "10^3 step pairs match |da1*da2| to " + fmt(worst_rel);
  return r;
}

CheckResult check_contraction_machinery() {
  CheckResult r{"contraction_machinery", true, "", 0.0};
  std::ostringstream why;

  // identity scaling in closed form
  std::vector<Profile> samples;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) samples.push_back({i / 4.0, j / 4.0});
  const auto build =
      build_contraction([](const Profile& x) { return x; }, samples, AnchorPolicy::centroid, 0.1);
  double max_dist = 0.0;
  for (const auto& s : samples)
    max_dist = std::max(max_dist, profile_distance(s, {0.5, 0.5}));
  if (std::abs(build.map.alpha - 0.9) > 1e-12 ||
      std::abs(build.delta2 - 0.1 * max_dist) > 1e-12) {
    r.pass = false;
    r.detail = "identity scaling values off";
    return r;
  }

  // affine fixed points
  ContractiveMap affine;
  affine.base = [](const Profile& x) { return Profile{0.5 * x[0] + 1.0}; };
  affine.anchor = {0.0};
  affine.alpha = 1.0;
  affine.base_lipschitz = 0.5;
  const auto fp = fixed_point(affine, {0.0}, 1e-12, 1000);
  if (std::abs(fp.x[0] - 2.0) > 1e-9) {
    r.pass = false;
    r.detail = "affine fixed point off by " + fmt(std::abs(fp.x[0] - 2.0));
    return r;
  }

  // radii arithmetic
  const auto b = theorem1_radii(1.0, 0.5, 0.5);
  if (std::abs(b.r_Z - 1.0) > 1e-12 || std::abs(b.r_K - 3.0) > 1e-12 ||
      std::abs(b.r_tilde - 4.0) > 1e-12) {
    r.pass = false;
    r.detail = "theorem 1 radii arithmetic off";
    return r;
  }
  const double delta1 = 1.2345;
  const auto anchor_case = theorem1_radii(delta1, 0.0, 0.5);
  if (std::abs(anchor_case.r_K - 2.0 * delta1) > 1e-12) {
    r.pass = false;
    r.detail = "r_K = 2 delta1 case off";
    return r;
  }
  const double part2 = theorem1_part2_radius(2, 1, 0.5, 0.5, 0.5, 1.0, 0.0);
  if (std::abs(part2 - 1.5) > 1e-12) {
    r.pass = false;
    r.detail = "part 2 radius arithmetic off";
    return r;
  }
  r.detail = "identity scaling, affine fixed points, and radius formulas all exact";
  return r;
}

CheckResult check_half_gradients() {
  CheckResult r{"half_gradient_check", true, "", 0.0};
  const SigmoidBumpPerturbation bump{100.0 / 3.0, 400.0 / 3.0};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const double a1 = 400.0 * i / 49, a2 = 400.0 * j / 49;
      const auto g = bump.half_gradients({a1, a2});
      const double h = 1e-5;
      const double fd1 = (bump.delta_u({a1 + h, a2}) - bump.delta_u({a1 - h, a2})) / (2 * h);
      const double fd2 = (bump.delta_u({a1, a2 + h}) - bump.delta_u({a1, a2 - h})) / (2 * h);
      worst = std::max(worst, std::abs(g[0] - 0.5 * fd1));
      worst = std::max(worst, std::abs(g[1] - 0.5 * fd2));
    }
  }
  if (worst > 1e-6) {
    r.pass = false;
    r.detail = "finite-difference mismatch " + fmt(worst);
    return r;
  }
  r.detail = "2500 grid points match central differences to " + fmt(worst);
  return r;
}

CheckResult check_estimated_response() {
  CheckResult r{"estimated_response", true, "", 0.0};
  const Profile ne = cournot_ne(kParams);
  UpdateRule rule;
  rule.kind = RuleKind::simultaneous_best;
  EstimatorSpec est;
  est.kind = EstimatorSpec::Kind::geometric;
  est.rho = 0.5;
  est.magnitude = 10.0;

  const SmoothGame nominal = nominal_game(kParams);
  const Trajectory nom = estimated_response_iterate(nominal, rule, {0.0, 0.0}, est, 42, 150);
  const double nominal_err = profile_distance(nom.states.back(), ne);
  if (nominal_err > 1e-4) {
    r.pass = false;
    r.detail = "nominal estimated-response error " + fmt(nominal_err);
    return r;
  }

  const SigmoidBumpPerturbation bump{ne[0], ne[1]};
  const SmoothGame perturbed = perturbed_game(kParams, bump);
  const double delta1 = delta1_bound(bump, Box{{0.0, 0.0}, {400.0, 400.0}});
  const double radius = estimated_response_radius(delta1, 0.0, 0.5).radius;
  const Trajectory per = estimated_response_iterate(perturbed, rule, {0.0, 0.0}, est, 43, 200);
  const TrapReport trap = verify_trap(per, ne, radius, 60);
  if (!trap.all_inside_after.has_value()) {
    r.pass = false;
    r.detail = "perturbed estimated-response tail escapes radius " + fmt(radius);
    return r;
  }
  r.detail = "nominal error " + fmt(nominal_err) + "; perturbed tail inside radius " +
             fmt(radius) + " from step " + std::to_string(*trap.all_inside_after);
  return r;
}

CheckResult check_determinism() {
  CheckResult r{"determinism", true, "", 0.0};
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() /
                        ("gamedyn_det_" + std::to_string(static_cast<unsigned>(::getpid())));
  const fs::path dir_a = base / "a", dir_b = base / "b";
  fs::remove_all(base);

  CournotExperimentConfig config;
  config.max_steps = 60;
  const Json echo = Json{{"command", "cournot"}};
  write_cournot_outputs(run_experiment(config), echo, dir_a.string());
  write_cournot_outputs(run_experiment(config), echo, dir_b.string());

  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir_a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir_a);
    const fs::path twin = dir_b / rel;
    if (!fs::exists(twin) || fnv1a_file(entry.path().string()) != fnv1a_file(twin.string())) {
      r.pass = false;
      r.detail = "file " + rel.string() + " differs between identical runs";
      fs::remove_all(base);
      return r;
    }
    ++compared;
  }
  fs::remove_all(base);
  if (compared == 0) {
    r.pass = false;
    r.detail = "no output files produced";
    return r;
  }
  r.detail = std::to_string(compared) + " output files byte-identical across repeated runs";
  return r;
}

using CheckFn = CheckResult (*)();

struct NamedCheck {
  const char* name;
  CheckFn fn;
};

CheckResult check_trap_repeated() { return check_cournot_trap(CournotMode::repeated); }
CheckResult check_trap_sequential() { return check_cournot_trap(CournotMode::sequential); }

constexpr NamedCheck kChecks[] = {
    {"cournot_nominal_convergence", check_cournot_nominal_convergence},
    {"cournot_trap_repeated", check_trap_repeated},
    {"cournot_trap_sequential", check_trap_sequential},
    {"theorem2_sweep", check_theorem2_sweep},
    {"exact_potential_identities", check_exact_potential_identities},
    {"lemma6_theorem4", check_lemma6_theorem4},
    {"taylor_exactness", check_taylor_exactness},
    {"contraction_machinery", check_contraction_machinery},
    {"half_gradient_check", check_half_gradients},
    {"estimated_response", check_estimated_response},
    {"determinism", check_determinism},
};

}  // namespace

std::vector<std::string> verify_check_names() {
  std::vector<std::string> names;
  for (const auto& c : kChecks) names.emplace_back(c.name);
  return names;
}

std::vector<CheckResult> run_verify_suite(
    const std::string& suite, const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> results;
  bool matched = false;
  for (const auto& check : kChecks) {
    if (suite != "all" && suite != check.name) continue;
    matched = true;
    const auto start = std::chrono::steady_clock::now();
    CheckResult result;
    try {
      result = check.fn();
    } catch (const std::exception& e) {
      result.name = check.name;
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(result);
    results.push_back(std::move(result));
  }
  if (!matched) throw Error::config("verify: unknown suite \"" + suite + "\"");
  return results;
}

}  // namespace gamedyn
