#include "gamedyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "gamedyn/rng.hpp"

namespace gamedyn {

double profile_distance(const Profile& a, const Profile& b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::sqrt(d2);
}

// --- finite-game steps ---------------------------------------------------

IndexProfile step_sequential_best(const FiniteGame& game, const IndexProfile& a, int player) {
  game.check_player(player);
  game.check_profile(a);
  const auto u = static_cast<std::size_t>(player);
  IndexProfile probe = a;
  int best = 0;
  probe[u] = 0;
  double best_v = game.utility(player, probe);
  for (int q = 1; q < game.action_count(player); ++q) {
    probe[u] = q;
    const double v = game.utility(player, probe);
    if (v > best_v) {
      best_v = v;
      best = q;
    }
  }
  probe[u] = a[u];
  if (game.utility(player, probe) >= best_v) return a;  // incumbent already optimal
  probe[u] = best;
  return probe;
}

std::optional<IndexProfile> step_sequential_better(const FiniteGame& game, const IndexProfile& a,
                                                   int player, BetterSelector selector) {
  game.check_player(player);
  game.check_profile(a);
  const auto u = static_cast<std::size_t>(player);
  const double incumbent = game.utility(player, a);
  IndexProfile probe = a;
  int chosen = -1;
  double chosen_v = incumbent;
  for (int q = 0; q < game.action_count(player); ++q) {
    if (q == a[u]) continue;
    probe[u] = q;
    const double v = game.utility(player, probe);
    if (v <= incumbent) continue;
    if (selector == BetterSelector::first_improving) {
      chosen = q;
      break;
    }
    if (v > chosen_v) {
      chosen_v = v;
      chosen = q;
    }
  }
  if (chosen < 0) return std::nullopt;
  probe[u] = chosen;
  return probe;
}

IndexProfile step_simultaneous_best(const FiniteGame& game, const IndexProfile& a) {
  IndexProfile next(a.size());
  for (int i = 0; i < game.players(); ++i)
    next[static_cast<std::size_t>(i)] =
        step_sequential_best(game, a, i)[static_cast<std::size_t>(i)];
  return next;
}

// --- smooth-game steps -----------------------------------------------------

Profile step_sequential_best(const SmoothGame& game, const Profile& a, int player) {
  Profile next = a;
  next[static_cast<std::size_t>(player)] = game.best_response(player, a);
  return next;
}

Profile step_simultaneous_best(const SmoothGame& game, const Profile& a) {
  Profile next(a.size());
  for (int i = 0; i < game.players(); ++i)
    next[static_cast<std::size_t>(i)] = game.best_response(i, a);
  return next;
}

// --- iteration (finite) ------------------------------------------------

namespace {

struct IndexProfileHash {
  std::size_t operator()(const IndexProfile& a) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (int v : a) {
      h ^= static_cast<std::size_t>(v) + 0x9E3779B9ULL;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

/// Players with a strictly improving action at `a`.
std::vector<int> eligible_players(const FiniteGame& game, const IndexProfile& a) {
  std::vector<int> out;
  for (int i = 0; i < game.players(); ++i) {
    IndexProfile probe = a;
    const double incumbent = game.utility(i, a);
    for (int q = 0; q < game.action_count(i); ++q) {
      probe[static_cast<std::size_t>(i)] = q;
      if (game.utility(i, probe) > incumbent) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

int pick_player(const std::vector<int>& eligible, Schedule schedule, int& rr_cursor, Rng& rng,
                int players) {
  if (schedule == Schedule::seeded_random_eligible)
    return eligible[static_cast<std::size_t>(rng.below(eligible.size()))];
  // round robin: first eligible player at or after the cursor
  for (int off = 0; off < players; ++off) {
    const int cand = (rr_cursor + off) % players;
    if (std::find(eligible.begin(), eligible.end(), cand) != eligible.end()) {
      rr_cursor = (cand + 1) % players;
      return cand;
    }
  }
  return eligible.front();
}

void push_state(Trajectory& t, const FiniteGame& game, const IndexProfile& a) {
  t.index_states.push_back(a);
  t.states.push_back(game.coords(a));
}

}  // namespace

Trajectory iterate(const FiniteGame& game, const UpdateRule& rule, const IndexProfile& x0,
                   const StopSpec& stop, std::uint64_t seed) {
  if (stop.max_steps < 1) throw Error::domain("iterate: max_steps must be at least 1");
  game.check_profile(x0);

  Trajectory traj;
  traj.finite = true;
  push_state(traj, game, x0);

  Rng rng(derive_seed(seed, 0));
  int rr_cursor = 0;
  std::unordered_map<IndexProfile, int, IndexProfileHash> seen;
  seen.emplace(x0, 0);

  IndexProfile cur = x0;
  for (int t = 0; t < stop.max_steps; ++t) {
    StepInfo info;
    IndexProfile next = cur;

    if (rule.kind == RuleKind::simultaneous_best) {
      next = step_simultaneous_best(game, cur);
      info.mover = kMoverAll;
      double best_gain = 0.0;
      for (int i = 0; i < game.players(); ++i) {
        IndexProfile uni = cur;
        uni[static_cast<std::size_t>(i)] = next[static_cast<std::size_t>(i)];
        best_gain = std::max(best_gain, game.utility(i, uni) - game.utility(i, cur));
      }
      info.improvement = best_gain;
      if (next == cur) {
        info.mover = kMoverNone;
        traj.steps.push_back(info);
        push_state(traj, game, next);
        return traj;  // fixed point, repeated once so detect_cycle sees it
      }
    } else {
      const std::vector<int> eligible = eligible_players(game, cur);
      if (eligible.empty()) {
        info.mover = kMoverNone;
        traj.steps.push_back(info);
        push_state(traj, game, cur);
        return traj;
      }
      const int player = pick_player(eligible, rule.schedule, rr_cursor, rng, game.players());
      if (rule.kind == RuleKind::sequential_best) {
        next = step_sequential_best(game, cur, player);
      } else {
        const auto moved = step_sequential_better(game, cur, player, rule.selector);
        next = moved.value();  // eligible player always has an improving move
      }
      info.mover = player;
      info.improvement = game.utility(player, next) - game.utility(player, cur);
    }

    info.w = profile_distance(game.coords(next), game.coords(cur));
    traj.steps.push_back(info);
    push_state(traj, game, next);

    if (stop.stop_on_cycle) {
      const auto [it, inserted] = seen.emplace(next, traj.length() - 1);
      if (!inserted) return traj;  // first recurrence recorded in the data
    }
    cur = next;
  }
  return traj;
}

// --- iteration (smooth) --------------------------------------------------

namespace {

/// Players whose best response strictly improves their utility at `a`.
std::vector<int> eligible_players(const SmoothGame& game, const Profile& a) {
  std::vector<int> out;
  for (int i = 0; i < game.players(); ++i) {
    Profile probe = a;
    probe[static_cast<std::size_t>(i)] = game.best_response(i, a);
    if (game.utility(i, probe) > game.utility(i, a)) out.push_back(i);
  }
  return out;
}

Trajectory iterate_smooth(const SmoothGame& game, const UpdateRule& rule, const Profile& x0,
                          const StopSpec& stop, std::uint64_t seed,
                          const EstimatorSpec* estimator) {
  if (stop.max_steps < 1) throw Error::domain("iterate: max_steps must be at least 1");
  if (static_cast<int>(x0.size()) != game.players())
    throw Error::shape("profile length does not match player count");
  if (rule.kind == RuleKind::sequential_better)
    throw Error::domain("sequential better response requires a finite game");

  Trajectory traj;
  traj.states.push_back(game.box().clamp(x0));

  Rng rng(derive_seed(seed, 0));
  int rr_cursor = 0;
  int quiet_steps = 0;

  Profile cur = traj.states.front();
  for (int t = 0; t < stop.max_steps; ++t) {
    Profile responded_to = cur;
    if (estimator != nullptr) {
      const double norm = estimator->norm_at(t);
      if (norm > 0.0) {
        const std::vector<double> dir = rng.sphere_direction(game.players());
        for (std::size_t i = 0; i < responded_to.size(); ++i) responded_to[i] += norm * dir[i];
        responded_to = game.box().clamp(std::move(responded_to));
      }
    }

    StepInfo info;
    Profile next = cur;
    if (rule.kind == RuleKind::simultaneous_best) {
      Profile target = step_simultaneous_best(game, responded_to);
      next = game.box().clamp(std::move(target));
      info.mover = kMoverAll;
      double best_gain = 0.0;
      for (int i = 0; i < game.players(); ++i) {
        Profile uni = cur;
        uni[static_cast<std::size_t>(i)] = next[static_cast<std::size_t>(i)];
        best_gain = std::max(best_gain, game.utility(i, uni) - game.utility(i, cur));
      }
      info.improvement = best_gain;
    } else {  // sequential_best
      const std::vector<int> eligible = eligible_players(game, responded_to);
      if (eligible.empty()) {
        info.mover = kMoverNone;
        traj.steps.push_back(info);
        traj.states.push_back(cur);
        return traj;
      }
      const int player = pick_player(eligible, rule.schedule, rr_cursor, rng, game.players());
      Profile target = step_sequential_best(game, responded_to, player);
      // only the mover's coordinate changes relative to the true state
      next = cur;
      next[static_cast<std::size_t>(player)] =
          game.box().clamp(player, target[static_cast<std::size_t>(player)]);
      info.mover = player;
      info.improvement = game.utility(player, next) - game.utility(player, cur);
    }

    info.w = profile_distance(next, cur);
    traj.steps.push_back(info);
    traj.states.push_back(next);

    if (info.w <= stop.fixed_point_tol) {
      if (++quiet_steps >= stop.fixed_point_window) return traj;
    } else {
      quiet_steps = 0;
    }
    cur = next;
  }
  return traj;
}

}  // namespace

Trajectory iterate(const SmoothGame& game, const UpdateRule& rule, const Profile& x0,
                   const StopSpec& stop, std::uint64_t seed) {
  return iterate_smooth(game, rule, x0, stop, seed, nullptr);
}

double EstimatorSpec::norm_at(int n) const {
  if (kind == Kind::geometric) return magnitude * std::pow(rho, n);
  return c / static_cast<double>(n + 1);
}

void EstimatorSpec::validate() const {
  if (kind == Kind::geometric) {
    if (!(rho > 0.0 && rho < 1.0)) throw Error::domain("estimator: rho must lie in (0,1)");
    if (magnitude < 0.0) throw Error::domain("estimator: magnitude must be nonnegative");
  } else {
    if (!(c > 0.0)) throw Error::domain("estimator: c must be positive");
  }
}

Trajectory estimated_response_iterate(const SmoothGame& game, const UpdateRule& rule,
                                      const Profile& x0, const EstimatorSpec& estimator,
                                      std::uint64_t seed, int max_steps, const StopSpec& stop) {
  estimator.validate();
  StopSpec s = stop;
  s.max_steps = max_steps;
  return iterate_smooth(game, rule, x0, s, seed, &estimator);
}

// --- cycle analysis ----------------------------------------------------

CycleReport detect_cycle(const Trajectory& trajectory) {
  if (!trajectory.finite)
    throw Error::domain("detect_cycle: trajectory must come from a finite game");
  CycleReport report;
  std::unordered_map<IndexProfile, int, IndexProfileHash> seen;
  for (int t = 0; t < trajectory.length(); ++t) {
    const auto [it, inserted] = seen.emplace(trajectory.index_states[static_cast<std::size_t>(t)], t);
    if (inserted) continue;
    report.entry = it->second;
    report.period = t - it->second;
    report.kind = report.period == 1 ? CycleKind::fixed_point : CycleKind::cycle;
    for (int r = 0; r < report.period; ++r)
      report.cycle_states.push_back(
          trajectory.index_states[static_cast<std::size_t>(report.entry + r)]);
    return report;
  }
  return report;  // undetermined
}

Theorem2Report verify_theorem2(const FiniteGame& perturbed_game,
                               const std::vector<double>& phi_table,
                               const Trajectory& trajectory) {
  Theorem2Report report;
  report.delta = potential_residual(perturbed_game, phi_table);

  const CycleReport cyc = detect_cycle(trajectory);
  if (cyc.kind == CycleKind::undetermined) return report;  // inconclusive, not an error
  report.resolved = true;
  report.period = cyc.period;
  report.entry = cyc.entry;
  report.eps_cycle = cyc.period * report.delta;
  report.eps_bound = report.delta * static_cast<double>(perturbed_game.joint_count());

  if (cyc.kind == CycleKind::fixed_point) {
    const IndexProfile& fp = cyc.cycle_states.front();
    report.fixed_point_is_ne = max_deviation_gain(perturbed_game, fp) <= 0.0;
    report.holds = report.fixed_point_is_ne;
    Theorem2Report::Witness w;
    w.state = fp;
    w.max_gain = max_deviation_gain(perturbed_game, fp);
    w.in_cycle_eps = w.in_bound_eps = report.fixed_point_is_ne;
    report.witnesses.push_back(std::move(w));
    return report;
  }

  // membership of every cycle state in the eps-NE sets
  bool all_in_bound = true;
  for (const auto& state : cyc.cycle_states) {
    Theorem2Report::Witness w;
    w.state = state;
    w.max_gain = max_deviation_gain(perturbed_game, state);
    w.in_cycle_eps = w.max_gain <= report.eps_cycle;
    w.in_bound_eps = w.max_gain <= report.eps_bound;
    all_in_bound = all_in_bound && w.in_bound_eps;
    report.witnesses.push_back(std::move(w));
  }

  // per-step inequality period*delta > alpha_r along the cycle
  for (int r = 0; r < cyc.period; ++r) {
    const auto& step = trajectory.steps[static_cast<std::size_t>(cyc.entry + r)];
    if (step.mover == kMoverAll)
      throw Error::domain("verify_theorem2: requires a sequential trajectory");
    report.alphas.push_back(step.improvement);
    if (!(report.eps_cycle > step.improvement)) report.alpha_inequality_ok = false;
  }

  report.holds = all_in_bound;
  return report;
}

}  // namespace gamedyn
