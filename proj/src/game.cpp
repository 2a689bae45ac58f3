#include "gamedyn/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gamedyn/rng.hpp"

namespace gamedyn {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// --- Box ---------------------------------------------------------------

double Box::clamp(int i, double v) const {
  return std::min(hi[static_cast<std::size_t>(i)],
                  std::max(lo[static_cast<std::size_t>(i)], v));
}

Profile Box::clamp(Profile p) const {
  for (int i = 0; i < dim(); ++i) p[static_cast<std::size_t>(i)] = clamp(i, p[static_cast<std::size_t>(i)]);
  return p;
}

bool Box::contains(const Profile& p, double tol) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (p[u] < lo[u] - tol || p[u] > hi[u] + tol) return false;
  }
  return true;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size())
    throw Error::shape("box: lo/hi must be nonempty and of equal length");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || hi[i] <= lo[i])
      throw Error::domain("box: interval " + std::to_string(i) + " is degenerate or invalid");
  }
}

// --- FiniteGame --------------------------------------------------------

FiniteGame::FiniteGame(std::vector<std::vector<double>> action_sets,
                       std::vector<std::vector<double>> utilities)
    : action_sets_(std::move(action_sets)), utilities_(std::move(utilities)) {
  if (action_sets_.empty()) throw Error::shape("finite game: need at least one player");
  for (std::size_t i = 0; i < action_sets_.size(); ++i) {
    const auto& s = action_sets_[i];
    if (s.empty()) throw Error::shape("finite game: player " + std::to_string(i) + " has no actions");
    if (!all_finite(s))
      throw Error::domain("finite game: non-finite action value for player " + std::to_string(i));
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b)
        if (s[a] == s[b])
          throw Error::domain("finite game: duplicate action value for player " + std::to_string(i));
  }
  joint_count_ = 1;
  for (const auto& s : action_sets_) joint_count_ *= s.size();
  strides_.assign(action_sets_.size(), 1);
  for (int i = players() - 2; i >= 0; --i)
    strides_[static_cast<std::size_t>(i)] =
        strides_[static_cast<std::size_t>(i) + 1] * action_sets_[static_cast<std::size_t>(i) + 1].size();

  if (utilities_.size() != action_sets_.size())
    throw Error::shape("finite game: expected one utility table per player");
  for (std::size_t i = 0; i < utilities_.size(); ++i) {
    if (utilities_[i].size() != joint_count_)
      throw Error::shape("finite game: utility table for player " + std::to_string(i) +
                         " has " + std::to_string(utilities_[i].size()) + " entries, expected " +
                         std::to_string(joint_count_));
    if (!all_finite(utilities_[i]))
      throw Error::domain("finite game: non-finite utility for player " + std::to_string(i));
  }
}

int FiniteGame::action_count(int player) const {
  check_player(player);
  return static_cast<int>(action_sets_[static_cast<std::size_t>(player)].size());
}

double FiniteGame::action_value(int player, int index) const {
  check_player(player);
  const auto& s = action_sets_[static_cast<std::size_t>(player)];
  if (index < 0 || index >= static_cast<int>(s.size()))
    throw Error::domain("finite game: action index out of range");
  return s[static_cast<std::size_t>(index)];
}

const std::vector<double>& FiniteGame::action_set(int player) const {
  check_player(player);
  return action_sets_[static_cast<std::size_t>(player)];
}

double FiniteGame::utility(int player, const IndexProfile& a) const {
  check_player(player);
  return utilities_[static_cast<std::size_t>(player)][flat_index(a)];
}

double FiniteGame::utility_flat(int player, std::size_t flat) const {
  return utilities_[static_cast<std::size_t>(player)][flat];
}

const std::vector<double>& FiniteGame::utility_table(int player) const {
  check_player(player);
  return utilities_[static_cast<std::size_t>(player)];
}

std::size_t FiniteGame::flat_index(const IndexProfile& a) const {
  check_profile(a);
  std::size_t flat = 0;
  for (int i = 0; i < players(); ++i)
    flat += static_cast<std::size_t>(a[static_cast<std::size_t>(i)]) * strides_[static_cast<std::size_t>(i)];
  return flat;
}

IndexProfile FiniteGame::unflatten(std::size_t flat) const {
  IndexProfile a(static_cast<std::size_t>(players()));
  for (int i = 0; i < players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    a[u] = static_cast<int>(flat / strides_[u]);
    flat %= strides_[u];
  }
  return a;
}

Profile FiniteGame::coords(const IndexProfile& a) const {
  check_profile(a);
  Profile x(static_cast<std::size_t>(players()));
  for (int i = 0; i < players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    x[u] = action_sets_[u][static_cast<std::size_t>(a[u])];
  }
  return x;
}

IndexProfile FiniteGame::nearest_indices(const Profile& x) const {
  if (static_cast<int>(x.size()) != players())
    throw Error::shape("profile length does not match player count");
  IndexProfile a(x.size());
  for (int i = 0; i < players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const auto& s = action_sets_[u];
    int best = 0;
    double best_d = std::abs(x[u] - s[0]);
    for (std::size_t j = 1; j < s.size(); ++j) {
      const double d = std::abs(x[u] - s[j]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    a[u] = best;
  }
  return a;
}

std::optional<IndexProfile> FiniteGame::exact_indices(const Profile& x, double tol) const {
  IndexProfile a = nearest_indices(x);
  for (int i = 0; i < players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (std::abs(action_sets_[u][static_cast<std::size_t>(a[u])] - x[u]) > tol) return std::nullopt;
  }
  return a;
}

bool FiniteGame::same_shape(const FiniteGame& other) const {
  return action_sets_ == other.action_sets_;
}

void FiniteGame::check_profile(const IndexProfile& a) const {
  if (static_cast<int>(a.size()) != players())
    throw Error::shape("profile length does not match player count");
  for (int i = 0; i < players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (a[u] < 0 || a[u] >= static_cast<int>(action_sets_[u].size()))
      throw Error::domain("action index out of range for player " + std::to_string(i));
  }
}

void FiniteGame::check_player(int player) const {
  if (player < 0 || player >= players())
    throw Error::domain("player index out of range: " + std::to_string(player));
}

// --- SmoothGame --------------------------------------------------------

SmoothGame::SmoothGame(Box box, std::vector<Evaluator> utilities)
    : box_(std::move(box)), utilities_(std::move(utilities)) {
  box_.validate();
  if (utilities_.empty() || static_cast<int>(utilities_.size()) != box_.dim())
    throw Error::shape("smooth game: need one utility evaluator per box dimension");
  for (const auto& u : utilities_)
    if (!u) throw Error::config("smooth game: null utility evaluator");
  best_response_.resize(utilities_.size());
  action_grids_.resize(utilities_.size());
  lipschitz_.assign(utilities_.size(), std::numeric_limits<double>::quiet_NaN());
}

SmoothGame& SmoothGame::set_best_response(int player, std::function<double(const Profile&)> br) {
  if (player < 0 || player >= players()) throw Error::domain("player index out of range");
  best_response_[static_cast<std::size_t>(player)] = std::move(br);
  return *this;
}

SmoothGame& SmoothGame::set_action_grid(int player, std::vector<double> grid) {
  if (player < 0 || player >= players()) throw Error::domain("player index out of range");
  if (grid.empty()) throw Error::domain("action grid must be nonempty");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw Error::domain("action grid must be sorted ascending");
  action_grids_[static_cast<std::size_t>(player)] = std::move(grid);
  return *this;
}

SmoothGame& SmoothGame::set_lipschitz(int player, double value) {
  if (player < 0 || player >= players()) throw Error::domain("player index out of range");
  if (!(value >= 0.0)) throw Error::domain("Lipschitz constant must be nonnegative");
  lipschitz_[static_cast<std::size_t>(player)] = value;
  return *this;
}

SmoothGame& SmoothGame::set_grid_resolution(int points_per_stage) {
  if (points_per_stage < 2) throw Error::domain("grid resolution must be at least 2");
  grid_resolution_ = points_per_stage;
  return *this;
}

double SmoothGame::utility(int player, const Profile& a) const {
  if (player < 0 || player >= players()) throw Error::domain("player index out of range");
  if (static_cast<int>(a.size()) != players())
    throw Error::shape("profile length does not match player count");
  return utilities_[static_cast<std::size_t>(player)](a);
}

bool SmoothGame::has_best_response(int player) const {
  return static_cast<bool>(best_response_[static_cast<std::size_t>(player)]);
}

bool SmoothGame::has_action_grid(int player) const {
  return !action_grids_[static_cast<std::size_t>(player)].empty();
}

const std::vector<double>& SmoothGame::action_grid(int player) const {
  if (!has_action_grid(player)) throw Error::config("player has no declared action grid");
  return action_grids_[static_cast<std::size_t>(player)];
}

std::optional<double> SmoothGame::declared_lipschitz(int player) const {
  const double v = lipschitz_[static_cast<std::size_t>(player)];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

double SmoothGame::grid_best(int player, const Profile& a) const {
  const auto u = static_cast<std::size_t>(player);
  Profile probe = a;
  const auto value_at = [&](double q) {
    probe[u] = q;
    return utilities_[u](probe);
  };

  double best_q;
  double best_v;
  if (has_action_grid(player)) {
    const auto& grid = action_grids_[u];
    best_q = grid[0];
    best_v = value_at(grid[0]);
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double v = value_at(grid[j]);
      if (v > best_v) {
        best_v = v;
        best_q = grid[j];
      }
    }
  } else {
    const double lo = box_.lo[u], hi = box_.hi[u];
    const int n = grid_resolution_;
    const double step = (hi - lo) / (n - 1);
    best_q = lo;
    best_v = value_at(lo);
    for (int j = 1; j < n; ++j) {
      const double q = (j == n - 1) ? hi : lo + step * j;
      const double v = value_at(q);
      if (v > best_v) {
        best_v = v;
        best_q = q;
      }
    }
    // one refinement pass around the stage-1 incumbent
    const double rlo = std::max(lo, best_q - step);
    const double rhi = std::min(hi, best_q + step);
    const double rstep = (rhi - rlo) / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double q = (j == n - 1) ? rhi : rlo + rstep * j;
      const double v = value_at(q);
      if (v > best_v) {
        best_v = v;
        best_q = q;
      }
    }
  }

  // incumbent wins when already optimal
  probe[u] = a[u];
  const double incumbent_v = utilities_[u](probe);
  if (incumbent_v >= best_v) return a[u];
  return best_q;
}

double SmoothGame::best_response(int player, const Profile& a) const {
  if (player < 0 || player >= players()) throw Error::domain("player index out of range");
  if (static_cast<int>(a.size()) != players())
    throw Error::shape("profile length does not match player count");
  if (has_best_response(player)) return best_response_[static_cast<std::size_t>(player)](a);
  return grid_best(player, a);
}

double SmoothGame::best_gain(int player, const Profile& a) const {
  const double q = best_response(player, a);
  Profile alt = a;
  alt[static_cast<std::size_t>(player)] = q;
  const double gain = utility(player, alt) - utility(player, a);
  return std::max(gain, 0.0);
}

FiniteGame SmoothGame::discretize() const {
  std::vector<std::vector<double>> sets;
  sets.reserve(static_cast<std::size_t>(players()));
  for (int i = 0; i < players(); ++i) {
    if (!has_action_grid(i))
      throw Error::config("discretize requires an action grid for every player");
    sets.push_back(action_grids_[static_cast<std::size_t>(i)]);
  }
  std::size_t joint = 1;
  for (const auto& s : sets) joint *= s.size();
  std::vector<std::size_t> strides(sets.size(), 1);
  for (int i = players() - 2; i >= 0; --i)
    strides[static_cast<std::size_t>(i)] =
        strides[static_cast<std::size_t>(i) + 1] * sets[static_cast<std::size_t>(i) + 1].size();

  std::vector<std::vector<double>> tables(sets.size(), std::vector<double>(joint));
  Profile x(static_cast<std::size_t>(players()));
  for (std::size_t flat = 0; flat < joint; ++flat) {
    std::size_t rem = flat;
    for (int i = 0; i < players(); ++i) {
      const auto u = static_cast<std::size_t>(i);
      x[u] = sets[u][rem / strides[u]];
      rem %= strides[u];
    }
    for (int i = 0; i < players(); ++i)
      tables[static_cast<std::size_t>(i)][flat] = utilities_[static_cast<std::size_t>(i)](x);
  }
  return FiniteGame(std::move(sets), std::move(tables));
}

// --- perturbed games ---------------------------------------------------

namespace {

FiniteGame add_tables(const FiniteGame& base, const std::vector<std::vector<double>>& delta) {
  if (delta.size() != static_cast<std::size_t>(base.players()))
    throw Error::shape("perturbation: expected one delta table per player");
  std::vector<std::vector<double>> sets;
  std::vector<std::vector<double>> tables;
  for (int i = 0; i < base.players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (delta[u].size() != base.joint_count())
      throw Error::shape("perturbation: delta table shape mismatch for player " + std::to_string(i));
    sets.push_back(base.action_set(i));
    std::vector<double> t = base.utility_table(i);
    for (std::size_t f = 0; f < t.size(); ++f) t[f] += delta[u][f];
    tables.push_back(std::move(t));
  }
  return FiniteGame(std::move(sets), std::move(tables));
}

}  // namespace

PerturbedFiniteGame::PerturbedFiniteGame(FiniteGame base,
                                         std::vector<std::vector<double>> delta_tables,
                                         std::vector<double> delta_lipschitz)
    : base_(std::move(base)),
      perturbed_(add_tables(base_, delta_tables)),
      delta_tables_(std::move(delta_tables)),
      delta_lipschitz_(std::move(delta_lipschitz)) {
  if (!delta_lipschitz_.empty() &&
      delta_lipschitz_.size() != static_cast<std::size_t>(base_.players()))
    throw Error::shape("perturbation: Lipschitz bound count mismatch");
}

PerturbedFiniteGame PerturbedFiniteGame::from_evaluators(FiniteGame base,
                                                         const std::vector<Evaluator>& delta,
                                                         std::vector<double> delta_lipschitz) {
  if (delta.size() != static_cast<std::size_t>(base.players()))
    throw Error::shape("perturbation: expected one evaluator per player");
  std::vector<std::vector<double>> tables(delta.size(),
                                          std::vector<double>(base.joint_count()));
  for (std::size_t flat = 0; flat < base.joint_count(); ++flat) {
    const Profile x = base.coords(base.unflatten(flat));
    for (std::size_t i = 0; i < delta.size(); ++i) tables[i][flat] = delta[i](x);
  }
  return PerturbedFiniteGame(std::move(base), std::move(tables), std::move(delta_lipschitz));
}

double PerturbedFiniteGame::delta_u(int player, const IndexProfile& a) const {
  base_.check_player(player);
  return delta_tables_[static_cast<std::size_t>(player)][base_.flat_index(a)];
}

PerturbedSmoothGame::PerturbedSmoothGame(SmoothGame base, std::vector<Evaluator> delta,
                                         std::vector<double> delta_lipschitz)
    : base_(std::move(base)),
      perturbed_(base_),
      delta_(std::move(delta)),
      delta_lipschitz_(std::move(delta_lipschitz)) {
  if (delta_.size() != static_cast<std::size_t>(base_.players()))
    throw Error::shape("perturbation: expected one evaluator per player");
  if (!delta_lipschitz_.empty() &&
      delta_lipschitz_.size() != static_cast<std::size_t>(base_.players()))
    throw Error::shape("perturbation: Lipschitz bound count mismatch");
  std::vector<Evaluator> summed;
  summed.reserve(delta_.size());
  for (int i = 0; i < base_.players(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const SmoothGame* b = &base_;
    Evaluator d = delta_[u];
    summed.push_back([b, i, d](const Profile& a) { return b->utility(i, a) + d(a); });
  }
  SmoothGame p(base_.box(), std::move(summed));
  for (int i = 0; i < base_.players(); ++i)
    if (base_.has_action_grid(i)) p.set_action_grid(i, base_.action_grid(i));
  p.set_grid_resolution(base_.grid_resolution());
  perturbed_ = std::move(p);
}

double PerturbedSmoothGame::delta_u(int player, const Profile& a) const {
  if (player < 0 || player >= base_.players()) throw Error::domain("player index out of range");
  return delta_[static_cast<std::size_t>(player)](a);
}

// --- operations --------------------------------------------------------

double deviation_gain(const FiniteGame& game, int player, const IndexProfile& a, int alt_index) {
  game.check_player(player);
  game.check_profile(a);
  if (alt_index < 0 || alt_index >= game.action_count(player))
    throw Error::domain("alternative action index out of range");
  IndexProfile alt = a;
  alt[static_cast<std::size_t>(player)] = alt_index;
  return game.utility(player, alt) - game.utility(player, a);
}

double deviation_gain(const SmoothGame& game, int player, const Profile& a, double alt_action) {
  if (player < 0 || player >= game.players()) throw Error::domain("player index out of range");
  const auto u = static_cast<std::size_t>(player);
  if (alt_action < game.box().lo[u] || alt_action > game.box().hi[u])
    throw Error::domain("alternative action outside the box");
  Profile alt = a;
  alt[u] = alt_action;
  return game.utility(player, alt) - game.utility(player, a);
}

double max_deviation_gain(const FiniteGame& game, const IndexProfile& a) {
  double best = 0.0;
  bool first = true;
  for (int i = 0; i < game.players(); ++i) {
    IndexProfile alt = a;
    const double incumbent = game.utility(i, a);
    for (int q = 0; q < game.action_count(i); ++q) {
      alt[static_cast<std::size_t>(i)] = q;
      const double gain = game.utility(i, alt) - incumbent;
      if (first || gain > best) {
        best = gain;
        first = false;
      }
    }
    alt[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
  }
  return best;
}

double mpd(const FiniteGame& g, const FiniteGame& g_hat) {
  if (g.players() != g_hat.players() || !g.same_shape(g_hat))
    throw Error::shape("mpd: games must share players and action sets");
  double worst = 0.0;
  for (std::size_t flat = 0; flat < g.joint_count(); ++flat) {
    const IndexProfile a = g.unflatten(flat);
    IndexProfile alt = a;
    for (int i = 0; i < g.players(); ++i) {
      const double ug = g.utility_flat(i, flat);
      const double uh = g_hat.utility_flat(i, flat);
      for (int q = 0; q < g.action_count(i); ++q) {
        alt[static_cast<std::size_t>(i)] = q;
        const std::size_t f2 = g.flat_index(alt);
        const double dg = g.utility_flat(i, f2) - ug;
        const double dh = g_hat.utility_flat(i, f2) - uh;
        worst = std::max(worst, std::abs(dg - dh));
      }
      alt[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
    }
  }
  return worst;
}

double potential_residual(const FiniteGame& game, const std::vector<double>& phi_table) {
  if (phi_table.size() != game.joint_count())
    throw Error::shape("potential table has " + std::to_string(phi_table.size()) +
                       " entries, expected " + std::to_string(game.joint_count()));
  double worst = 0.0;
  for (std::size_t flat = 0; flat < game.joint_count(); ++flat) {
    const IndexProfile a = game.unflatten(flat);
    IndexProfile alt = a;
    for (int i = 0; i < game.players(); ++i) {
      const double u0 = game.utility_flat(i, flat);
      for (int q = 0; q < game.action_count(i); ++q) {
        alt[static_cast<std::size_t>(i)] = q;
        const std::size_t f2 = game.flat_index(alt);
        const double du = game.utility_flat(i, f2) - u0;
        const double dphi = phi_table[f2] - phi_table[flat];
        worst = std::max(worst, std::abs(du - dphi));
      }
      alt[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
    }
  }
  return worst;
}

std::vector<IndexProfile> epsilon_ne_set(const FiniteGame& game, double eps) {
  if (eps < 0.0) throw Error::domain("epsilon must be nonnegative");
  std::vector<IndexProfile> out;
  for (std::size_t flat = 0; flat < game.joint_count(); ++flat) {
    const IndexProfile a = game.unflatten(flat);
    if (max_deviation_gain(game, a) <= eps) out.push_back(a);
  }
  return out;
}

bool is_epsilon_ne(const FiniteGame& game, const IndexProfile& a, double eps) {
  if (eps < 0.0) throw Error::domain("epsilon must be nonnegative");
  return max_deviation_gain(game, a) <= eps;
}

double nu(const SmoothGame& game, const Profile& x) {
  double worst = 0.0;
  for (int i = 0; i < game.players(); ++i) worst = std::max(worst, game.best_gain(i, x));
  return -worst;
}

double lipschitz_estimate(const Evaluator& f, const Box& box, int sample_count,
                          std::uint64_t seed) {
  box.validate();
  if (!f) throw Error::config("lipschitz_estimate: null evaluator");
  if (sample_count < 2) throw Error::domain("lipschitz_estimate: need at least 2 samples");

  const int dim = box.dim();
  Rng rng(seed);
  std::vector<Profile> pts(static_cast<std::size_t>(sample_count), Profile(static_cast<std::size_t>(dim)));
  for (auto& p : pts)
    for (int i = 0; i < dim; ++i)
      p[static_cast<std::size_t>(i)] =
          rng.uniform(box.lo[static_cast<std::size_t>(i)], box.hi[static_cast<std::size_t>(i)]);

  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double d = pts[i][static_cast<std::size_t>(k)] - pts[j][static_cast<std::size_t>(k)];
        d2 += d * d;
      }
      if (d2 <= 1e-24) continue;
      best = std::max(best, std::abs(vals[i] - vals[j]) / std::sqrt(d2));
    }
  }

  // central finite differences on a uniform grid
  int per_axis = 3;
  switch (dim) {
    case 1: per_axis = 513; break;
    case 2: per_axis = 65; break;
    case 3: per_axis = 17; break;
    default: per_axis = 5; break;
  }
  std::size_t grid_total = 1;
  for (int i = 0; i < dim; ++i) grid_total *= static_cast<std::size_t>(per_axis);

  Profile x(static_cast<std::size_t>(dim));
  for (std::size_t g = 0; g < grid_total; ++g) {
    std::size_t rem = g;
    for (int i = 0; i < dim; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const std::size_t idx = rem % static_cast<std::size_t>(per_axis);
      rem /= static_cast<std::size_t>(per_axis);
      x[u] = box.lo[u] + (box.hi[u] - box.lo[u]) * (static_cast<double>(idx) + 0.5) /
                             static_cast<double>(per_axis);
    }
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const double h = std::max((box.hi[u] - box.lo[u]) * 1e-7, 1e-12);
      Profile xp = x, xm = x;
      xp[u] = std::min(box.hi[u], x[u] + h);
      xm[u] = std::max(box.lo[u], x[u] - h);
      const double denom = xp[u] - xm[u];
      if (denom <= 0.0) continue;
      const double gi = (f(xp) - f(xm)) / denom;
      norm2 += gi * gi;
    }
    best = std::max(best, std::sqrt(norm2));
  }
  return best;
}

}  // namespace gamedyn
