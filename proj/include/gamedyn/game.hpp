#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gamedyn/error.hpp"

namespace gamedyn {

/// Joint action profile, one real action per player (fixed player order).
using Profile = std::vector<double>;
/// Finite-game profile addressed by per-player action indices.
using IndexProfile = std::vector<int>;
/// Real-valued function of a full profile.
using Evaluator = std::function<double(const Profile&)>;

/// Per-player closed interval constraints [lo_i, hi_i].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double clamp(int i, double v) const;
  Profile clamp(Profile p) const;
  bool contains(const Profile& p, double tol = 0.0) const;
  void validate() const;  // throws on hi <= lo or size mismatch
};

enum class Provenance { analytic, sampled };

/// Lipschitz constant together with how it was obtained. Sampled values are
/// lower estimates; analytic values are caller-supplied closed forms.
struct LipschitzBound {
  double value = 0.0;
  Provenance provenance = Provenance::sampled;
};

/// Finite game with dense per-player utility tables in row-major joint-action
/// order (player 0 is the slowest-varying index).
class FiniteGame {
 public:
  FiniteGame(std::vector<std::vector<double>> action_sets,
             std::vector<std::vector<double>> utilities);

  int players() const { return static_cast<int>(action_sets_.size()); }
  int action_count(int player) const;
  double action_value(int player, int index) const;
  const std::vector<double>& action_set(int player) const;
  std::size_t joint_count() const { return joint_count_; }

  double utility(int player, const IndexProfile& a) const;
  double utility_flat(int player, std::size_t flat) const;
  const std::vector<double>& utility_table(int player) const;

  std::size_t flat_index(const IndexProfile& a) const;
  IndexProfile unflatten(std::size_t flat) const;
  Profile coords(const IndexProfile& a) const;

  /// Snap real coordinates to the nearest declared action of each player.
  IndexProfile nearest_indices(const Profile& x) const;
  /// Indices whose action values match x within tol; nullopt when any
  /// coordinate is farther than tol from every declared action.
  std::optional<IndexProfile> exact_indices(const Profile& x, double tol = 1e-9) const;

  bool same_shape(const FiniteGame& other) const;
  void check_profile(const IndexProfile& a) const;
  void check_player(int player) const;

 private:
  std::vector<std::vector<double>> action_sets_;
  std::vector<std::vector<double>> utilities_;  // [player][flat joint index]
  std::vector<std::size_t> strides_;
  std::size_t joint_count_ = 1;
};

/// Box-constrained game given by utility evaluators. Optional per-player
/// extras: an analytic scalar best-response oracle, a discrete action grid
/// (for discretized games; inner maximization is then exact over the grid),
/// and a declared Lipschitz constant for the utility.
class SmoothGame {
 public:
  SmoothGame(Box box, std::vector<Evaluator> utilities);

  SmoothGame& set_best_response(int player, std::function<double(const Profile&)> br);
  SmoothGame& set_action_grid(int player, std::vector<double> grid);
  SmoothGame& set_lipschitz(int player, double value);
  SmoothGame& set_grid_resolution(int points_per_stage);

  int players() const { return static_cast<int>(utilities_.size()); }
  const Box& box() const { return box_; }
  double utility(int player, const Profile& a) const;

  bool has_best_response(int player) const;
  bool has_action_grid(int player) const;
  const std::vector<double>& action_grid(int player) const;
  std::optional<double> declared_lipschitz(int player) const;
  int grid_resolution() const { return grid_resolution_; }

  /// Best scalar action for `player` against a's other coordinates. Uses the
  /// analytic oracle when present, else the declared action grid, else a
  /// uniform grid over [lo,hi] refined once around the stage-1 incumbent.
  /// Ties go to the lowest candidate; the incumbent wins when already optimal.
  double best_response(int player, const Profile& a) const;
  /// max_q u(q, a_-i) - u(a), never negative (the incumbent is a candidate).
  double best_gain(int player, const Profile& a) const;

  /// Materialize the dense finite game over the declared action grids.
  FiniteGame discretize() const;

 private:
  double grid_best(int player, const Profile& a) const;

  Box box_;
  std::vector<Evaluator> utilities_;
  std::vector<std::function<double(const Profile&)>> best_response_;
  std::vector<std::vector<double>> action_grids_;
  std::vector<double> lipschitz_;  // NaN = undeclared
  int grid_resolution_ = 512;
};

/// Additive perturbation of a finite game: u^M_i = u_i + du_i, with optional
/// declared Lipschitz bounds for the du_i.
class PerturbedFiniteGame {
 public:
  PerturbedFiniteGame(FiniteGame base, std::vector<std::vector<double>> delta_tables,
                      std::vector<double> delta_lipschitz = {});
  static PerturbedFiniteGame from_evaluators(FiniteGame base,
                                             const std::vector<Evaluator>& delta,
                                             std::vector<double> delta_lipschitz = {});

  const FiniteGame& base() const { return base_; }
  const FiniteGame& perturbed() const { return perturbed_; }
  double delta_u(int player, const IndexProfile& a) const;
  const std::vector<double>& delta_lipschitz() const { return delta_lipschitz_; }

 private:
  FiniteGame base_;
  FiniteGame perturbed_;
  std::vector<std::vector<double>> delta_tables_;
  std::vector<double> delta_lipschitz_;
};

/// Additive perturbation of a smooth game. perturbed() carries the summed
/// evaluators plus the base's box and action grids; best-response oracles are
/// not inherited (the perturbed argmax differs from the nominal one).
class PerturbedSmoothGame {
 public:
  PerturbedSmoothGame(SmoothGame base, std::vector<Evaluator> delta,
                      std::vector<double> delta_lipschitz = {});

  const SmoothGame& base() const { return base_; }
  const SmoothGame& perturbed() const { return perturbed_; }
  double delta_u(int player, const Profile& a) const;
  const std::vector<double>& delta_lipschitz() const { return delta_lipschitz_; }

 private:
  SmoothGame base_;
  SmoothGame perturbed_;
  std::vector<Evaluator> delta_;
  std::vector<double> delta_lipschitz_;
};

// --- operations ------------------------------------------------------------

/// u_i(a'_i, a_-i) - u_i(a).
double deviation_gain(const FiniteGame& game, int player, const IndexProfile& a, int alt_index);
double deviation_gain(const SmoothGame& game, int player, const Profile& a, double alt_action);

/// max over i and a'_i of deviation_gain; a is a 0-NE iff this is <= 0.
double max_deviation_gain(const FiniteGame& game, const IndexProfile& a);

/// Maximum pairwise difference between two games sharing players and actions.
double mpd(const FiniteGame& g, const FiniteGame& g_hat);

/// max over i, a'_i, a of |[u_i(a'_i,a_-i)-u_i(a)] - [phi(a'_i,a_-i)-phi(a)]|.
/// Zero iff phi is an exact potential for the game.
double potential_residual(const FiniteGame& game, const std::vector<double>& phi_table);

/// All profiles whose best unilateral deviation gains at most eps.
std::vector<IndexProfile> epsilon_ne_set(const FiniteGame& game, double eps);
bool is_epsilon_ne(const FiniteGame& game, const IndexProfile& a, double eps);

/// nu(x) = -max over players of the best unilateral gain at x; always <= 0,
/// and x is an eps-NE iff nu(x) >= -eps.
double nu(const SmoothGame& game, const Profile& x);

/// Sampled lower estimate of the Lipschitz constant of f over the box:
/// max difference quotient over seeded point pairs combined with central
/// finite-difference gradient norms on a uniform grid. Callers holding a
/// closed form should prefer it (see LipschitzBound provenance).
double lipschitz_estimate(const Evaluator& f, const Box& box, int sample_count,
                          std::uint64_t seed);

}  // namespace gamedyn
