#include "gamedyn/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gamedyn/rng.hpp"

namespace gamedyn {

IndicatorVector one_hot_indicator(const FiniteGame& game, const IndexProfile& a) {
  game.check_profile(a);
  IndicatorVector f(static_cast<std::size_t>(game.players()));
  for (int i = 0; i < game.players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    f[u].assign(static_cast<std::size_t>(game.action_count(i)), 0.0);
    f[u][static_cast<std::size_t>(a[u])] = 1.0;
  }
  return f;
}

double mixed_potential_U(const FiniteGame& game, const std::vector<double>& phi_table,
                         const IndicatorVector& f) {
  if (phi_table.size() != game.joint_count())
    throw Error::shape("mixed_potential_U: potential table shape mismatch");
  if (f.size() != static_cast<std::size_t>(game.players()))
    throw Error::shape("mixed_potential_U: expected one weight vector per player");
  for (int i = 0; i < game.players(); ++i)
    if (f[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(game.action_count(i)))
      throw Error::shape("mixed_potential_U: weight vector shape mismatch for player " +
                         std::to_string(i));

  double total = 0.0;
  for (std::size_t flat = 0; flat < game.joint_count(); ++flat) {
    const IndexProfile a = game.unflatten(flat);
    double w = 1.0;
    for (int i = 0; i < game.players(); ++i)
      w *= f[static_cast<std::size_t>(i)][static_cast<std::size_t>(a[static_cast<std::size_t>(i)])];
    if (w != 0.0) total += phi_table[flat] * w;
  }
  return total;
}

double taylor_residual_k(const FiniteGame& game, const std::vector<double>& phi_table,
                         const IndexProfile& x, const IndexProfile& x_next) {
  if (phi_table.size() != game.joint_count())
    throw Error::shape("taylor_residual_k: potential table shape mismatch");
  const double phi_x = phi_table[game.flat_index(x)];
  const double phi_next = phi_table[game.flat_index(x_next)];
  double unilateral = 0.0;
  IndexProfile probe = x;
  for (int m = 0; m < game.players(); ++m) {
    const auto u = static_cast<std::size_t>(m);
    probe[u] = x_next[u];
    unilateral += phi_table[game.flat_index(probe)] - phi_x;
    probe[u] = x[u];
  }
  return std::abs(phi_next - phi_x - unilateral);
}

double taylor_residual_k(const Evaluator& phi, const Profile& x, const Profile& x_next) {
  if (!phi) throw Error::config("taylor_residual_k: null potential evaluator");
  if (x.size() != x_next.size()) throw Error::shape("taylor_residual_k: profile size mismatch");
  const double phi_x = phi(x);
  const double phi_next = phi(x_next);
  double unilateral = 0.0;
  Profile probe = x;
  for (std::size_t m = 0; m < x.size(); ++m) {
    probe[m] = x_next[m];
    unilateral += phi(probe) - phi_x;
    probe[m] = x[m];
  }
  return std::abs(phi_next - phi_x - unilateral);
}

void annotate_residuals(Trajectory& trajectory, const FiniteGame& game,
                        const std::vector<double>& phi_table) {
  if (!trajectory.finite)
    throw Error::domain("annotate_residuals: trajectory is not index-valued");
  for (std::size_t t = 0; t + 1 < trajectory.index_states.size(); ++t)
    trajectory.steps[t].k = taylor_residual_k(game, phi_table, trajectory.index_states[t],
                                              trajectory.index_states[t + 1]);
}

void annotate_residuals(Trajectory& trajectory, const Evaluator& phi) {
  for (std::size_t t = 0; t + 1 < trajectory.states.size(); ++t)
    trajectory.steps[t].k = taylor_residual_k(phi, trajectory.states[t],
                                              trajectory.states[t + 1]);
}

Lemma6Report lemma6_check(const FiniteGame& game, const Trajectory& trajectory,
                          const std::vector<double>& phi_table, double delta, double eps) {
  if (!trajectory.finite) throw Error::domain("lemma6_check: trajectory is not index-valued");
  if (phi_table.size() != game.joint_count())
    throw Error::shape("lemma6_check: potential table shape mismatch");
  if (eps < 0.0) throw Error::domain("lemma6_check: eps must be nonnegative");

  Lemma6Report report;
  const int n = static_cast<int>(game.players());
  for (std::size_t t = 0; t + 1 < trajectory.index_states.size(); ++t) {
    const IndexProfile& x = trajectory.index_states[t];
    if (max_deviation_gain(game, x) <= eps) continue;
    ++report.steps_outside;
    const IndexProfile& x_next = trajectory.index_states[t + 1];
    const double lhs = phi_table[game.flat_index(x_next)] - phi_table[game.flat_index(x)];
    const double k = taylor_residual_k(game, phi_table, x, x_next);
    const double rhs = eps - n * delta - k;
    if (lhs < rhs - 1e-12)
      report.violations.push_back({static_cast<int>(t), lhs, rhs});
  }
  return report;
}

LipschitzBound l_zero(const FiniteGame& game) {
  // exhaustive pairwise quotient over the discrete action space
  double worst = 0.0;
  std::vector<Profile> coords(game.joint_count());
  for (std::size_t f = 0; f < game.joint_count(); ++f) coords[f] = game.coords(game.unflatten(f));
  for (int m = 0; m < game.players(); ++m) {
    const auto& table = game.utility_table(m);
    for (std::size_t i = 0; i < game.joint_count(); ++i) {
      for (std::size_t j = i + 1; j < game.joint_count(); ++j) {
        const double dx = profile_distance(coords[i], coords[j]);
        if (dx <= 0.0) continue;
        worst = std::max(worst, std::abs(table[i] - table[j]) / dx);
      }
    }
  }
  return {2.0 * worst, Provenance::sampled};
}

LipschitzBound l_zero(const SmoothGame& game, int sample_count, std::uint64_t seed) {
  bool all_declared = true;
  double worst = 0.0;
  for (int m = 0; m < game.players(); ++m) {
    const auto declared = game.declared_lipschitz(m);
    if (declared.has_value()) {
      worst = std::max(worst, *declared);
    } else {
      all_declared = false;
      const SmoothGame* g = &game;
      const Evaluator f = [g, m](const Profile& a) { return g->utility(m, a); };
      worst = std::max(worst, lipschitz_estimate(f, game.box(), sample_count,
                                                 derive_seed(seed, static_cast<std::uint64_t>(m))));
    }
  }
  return {2.0 * worst, all_declared ? Provenance::analytic : Provenance::sampled};
}

bool lemma7_check(const FiniteGame& game, const IndexProfile& x, const IndexProfile& y,
                  double alpha, double L0) {
  if (alpha < 0.0 || L0 < 0.0) throw Error::domain("lemma7_check: negative alpha or L0");
  if (max_deviation_gain(game, x) > alpha)
    throw Error::domain("lemma7_check: x is not an alpha-NE");
  const double theta = profile_distance(game.coords(x), game.coords(y));
  return max_deviation_gain(game, y) <= alpha + L0 * theta + 1e-12;
}

bool lemma7_check(const SmoothGame& game, const Profile& x, const Profile& y, double alpha,
                  double L0) {
  if (alpha < 0.0 || L0 < 0.0) throw Error::domain("lemma7_check: negative alpha or L0");
  if (nu(game, x) < -alpha - 1e-12) throw Error::domain("lemma7_check: x is not an alpha-NE");
  const double theta = profile_distance(x, y);
  return nu(game, y) >= -(alpha + L0 * theta) - 1e-12;
}

// --- invariant sets ------------------------------------------------------

namespace {

struct TailSups {
  double sup_k = 0.0;
  double sup_w = 0.0;
};

TailSups tail_sups(const Trajectory& trajectory, int T0, TailMode mode, double window_fraction) {
  const int steps = static_cast<int>(trajectory.steps.size());
  if (T0 < 0 || T0 >= trajectory.length())
    throw Error::domain("invariant set: T0 must be less than the trajectory length");
  int start = T0;
  if (mode == TailMode::limsup_windowed) {
    const int window_start =
        steps - static_cast<int>(std::ceil(static_cast<double>(steps - T0) * window_fraction));
    start = std::max(T0, window_start);
  }
  TailSups out;
  for (int t = start; t < steps; ++t) {
    out.sup_k = std::max(out.sup_k, trajectory.steps[static_cast<std::size_t>(t)].k);
    out.sup_w = std::max(out.sup_w, trajectory.steps[static_cast<std::size_t>(t)].w);
  }
  return out;
}

}  // namespace

InvariantSetSpec build_invariant_set(const FiniteGame& game, const std::vector<double>& phi_table,
                                     const Trajectory& trajectory, int T0, double eps,
                                     TailMode mode, double window_fraction) {
  if (eps < 0.0) throw Error::domain("invariant set: eps must be nonnegative");
  if (phi_table.size() != game.joint_count())
    throw Error::shape("invariant set: potential table shape mismatch");
  if (!trajectory.finite) throw Error::domain("invariant set: trajectory is not index-valued");

  Trajectory annotated = trajectory;
  annotate_residuals(annotated, game, phi_table);

  InvariantSetSpec spec;
  spec.players = game.players();
  spec.delta = potential_residual(game, phi_table);
  const TailSups sups = tail_sups(annotated, T0, mode, window_fraction);
  spec.sup_k = sups.sup_k;
  spec.sup_w = sups.sup_w;
  const LipschitzBound l0 = l_zero(game);
  spec.L0 = l0.value;
  spec.l0_provenance = l0.provenance;
  spec.epsilon = eps;
  spec.mode = mode;
  spec.T0 = T0;
  spec.window_fraction = window_fraction;
  spec.R4 = spec.players * spec.delta + spec.sup_k + eps;
  spec.R5 = spec.R4 + spec.L0 * spec.sup_w;
  spec.grid_per_axis = 0;  // exact enumeration over the action space

  bool found = false;
  double threshold = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < game.joint_count(); ++flat) {
    const IndexProfile a = game.unflatten(flat);
    if (max_deviation_gain(game, a) > spec.R5) continue;
    found = true;
    if (phi_table[flat] < threshold) {
      threshold = phi_table[flat];
      spec.threshold_witness = game.coords(a);
    }
  }
  if (!found)
    throw Error::resolution("invariant set: no profile lies in the R5-NE set (R5 = " +
                            std::to_string(spec.R5) + ")");
  spec.phi_threshold = threshold;
  return spec;
}

InvariantSetSpec build_invariant_set(const SmoothGame& game, const Evaluator& phi,
                                     const Trajectory& trajectory, int T0, double eps,
                                     TailMode mode, int grid_per_axis, double window_fraction) {
  if (eps < 0.0) throw Error::domain("invariant set: eps must be nonnegative");
  if (!phi) throw Error::config("invariant set: null potential evaluator");
  if (grid_per_axis < 2) throw Error::domain("invariant set: grid must have at least 2 points");
  for (int i = 0; i < game.players(); ++i)
    if (!game.has_action_grid(i))
      throw Error::config("invariant set: the smooth game needs declared action grids");

  Trajectory annotated = trajectory;
  annotate_residuals(annotated, phi);

  InvariantSetSpec spec;
  spec.players = game.players();
  {
    const FiniteGame table_game = game.discretize();
    std::vector<double> phi_table(table_game.joint_count());
    for (std::size_t f = 0; f < table_game.joint_count(); ++f)
      phi_table[f] = phi(table_game.coords(table_game.unflatten(f)));
    spec.delta = potential_residual(table_game, phi_table);
  }
  const TailSups sups = tail_sups(annotated, T0, mode, window_fraction);
  spec.sup_k = sups.sup_k;
  spec.sup_w = sups.sup_w;
  const LipschitzBound l0 = l_zero(game);
  spec.L0 = l0.value;
  spec.l0_provenance = l0.provenance;
  spec.epsilon = eps;
  spec.mode = mode;
  spec.T0 = T0;
  spec.window_fraction = window_fraction;
  spec.R4 = spec.players * spec.delta + spec.sup_k + eps;
  spec.R5 = spec.R4 + spec.L0 * spec.sup_w;
  spec.grid_per_axis = grid_per_axis;

  // min phi over the R5-NE set, searched on a uniform grid over the box
  const Box& box = game.box();
  const int dim = game.players();
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(grid_per_axis);

  bool found = false;
  double threshold = std::numeric_limits<double>::infinity();
  Profile x(static_cast<std::size_t>(dim));
  for (std::size_t g = 0; g < total; ++g) {
    std::size_t rem = g;
    for (int i = 0; i < dim; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const std::size_t idx = rem % static_cast<std::size_t>(grid_per_axis);
      rem /= static_cast<std::size_t>(grid_per_axis);
      x[u] = box.lo[u] + (box.hi[u] - box.lo[u]) * static_cast<double>(idx) /
                             static_cast<double>(grid_per_axis - 1);
    }
    if (nu(game, x) < -spec.R5) continue;
    found = true;
    const double v = phi(x);
    if (v < threshold) {
      threshold = v;
      spec.threshold_witness = x;
    }
  }
  if (!found)
    throw Error::resolution("invariant set: grid too coarse, no R5-NE member found (R5 = " +
                            std::to_string(spec.R5) + ", grid " + std::to_string(grid_per_axis) +
                            " per axis)");
  spec.phi_threshold = threshold;
  return spec;
}

namespace {

template <typename PhiAt, typename GainAt>
Theorem4Report theorem4_impl(const Trajectory& trajectory, const InvariantSetSpec& spec,
                             PhiAt phi_at, GainAt gain_at) {
  Theorem4Report report;
  for (int t = spec.T0; t < trajectory.length(); ++t) {
    if (gain_at(t) <= spec.R4) {
      report.first_r4_visit = t;
      break;
    }
  }
  for (int t = spec.T0; t < trajectory.length(); ++t) {
    if (spec.contains(phi_at(t))) {
      report.entry_index = t;
      break;
    }
  }
  if (report.entry_index.has_value()) {
    for (int t = *report.entry_index + 1; t < trajectory.length(); ++t)
      if (!spec.contains(phi_at(t))) report.post_entry_violations.push_back(t);
  }
  return report;
}

}  // namespace

Theorem4Report theorem4_verify(const FiniteGame& game, const std::vector<double>& phi_table,
                               const Trajectory& trajectory, const InvariantSetSpec& spec) {
  if (!trajectory.finite) throw Error::domain("theorem4_verify: trajectory is not index-valued");
  if (phi_table.size() != game.joint_count())
    throw Error::shape("theorem4_verify: potential table shape mismatch");
  return theorem4_impl(
      trajectory, spec,
      [&](int t) {
        return phi_table[game.flat_index(trajectory.index_states[static_cast<std::size_t>(t)])];
      },
      [&](int t) {
        return max_deviation_gain(game, trajectory.index_states[static_cast<std::size_t>(t)]);
      });
}

Theorem4Report theorem4_verify(const SmoothGame& game, const Evaluator& phi,
                               const Trajectory& trajectory, const InvariantSetSpec& spec) {
  if (!phi) throw Error::config("theorem4_verify: null potential evaluator");
  return theorem4_impl(
      trajectory, spec,
      [&](int t) { return phi(trajectory.states[static_cast<std::size_t>(t)]); },
      [&](int t) { return -nu(game, trajectory.states[static_cast<std::size_t>(t)]); });
}

}  // namespace gamedyn
