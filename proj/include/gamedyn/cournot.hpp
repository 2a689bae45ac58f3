#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gamedyn/contraction.hpp"
#include "gamedyn/dynamics.hpp"
#include "gamedyn/game.hpp"

namespace gamedyn {

/// Duopoly with price P = max{d - a1 - a2, 0} and payoff a_i (P - c_i).
struct CournotParams {
  double d = 400.0;
  double c1 = 200.0;
  double c2 = 100.0;
  double a_bar = 400.0;  // box upper bound per player

  void validate() const;
  double cost(int player) const { return player == 0 ? c1 : c2; }
};

double cournot_utility(const CournotParams& p, int player, const Profile& a);

/// Interior Nash equilibrium ((d-2c1+c2)/3, (d-2c2+c1)/3).
Profile cournot_ne(const CournotParams& p);

/// Clipped affine best response of one player: max{0, (d - a_j - c_i)/2}.
double nominal_br_action(const CournotParams& p, int player, const Profile& a);
/// Both coordinates simultaneously.
Profile nominal_br_step(const CournotParams& p, const Profile& a);

/// phi(a) = d(a1+a2) - a1^2 - a2^2 - a1 a2 - c1 a1 - c2 a2.
double cournot_potential(const CournotParams& p, const Profile& a);

/// Taylor remainder bound M = |int int phi| over [0,abar1]x[0,abar2]. The
/// closed form assumes a common cost c; default c = (c1+c2)/2, overridable.
double taylor_M(const CournotParams& p, double abar1, double abar2,
                std::optional<double> c_override = std::nullopt);

/// Exact max of ||grad u_i|| over the box: the norm is convex on the P>0
/// polytope (max at its vertices) and constant c_i on the P=0 piece.
double cournot_utility_lipschitz(const CournotParams& p, int player, const Box& box);

/// du_i(a) = 1 / (1 + exp(-((a1-mu1)^2 + (a2-mu2)^2)^2)), identical for both
/// players.
struct SigmoidBumpPerturbation {
  double mu1 = 0.0;
  double mu2 = 0.0;

  double delta_u(const Profile& a) const;
  /// (1/2) d(du)/da_i, the two displayed update terms.
  std::array<double, 2> half_gradients(const Profile& a) const;
  std::array<double, 2> gradient(const Profile& a) const;
};

struct RootSolveResult {
  double root = 0.0;
  double residual = 0.0;  // |F(root)|; 0 when clamped
  int iterations = 0;
  bool clamped = false;   // negative root clamped to zero
};

/// Solve -z + (d - a_j - c_i)/2 + (1/2) d(du_i)/da_i (z, a_j) = 0 for the
/// updated action of `player` by safeguarded Newton with bisection fallback
/// on [0, d]; a negative root clamps to zero.
RootSolveResult perturbed_br_action(const CournotParams& p, const SigmoidBumpPerturbation& pert,
                                    int player, const Profile& a, double tol = 1e-10,
                                    int max_iters = 200);

/// Simultaneous perturbed update (both players against a's other coordinate).
Profile perturbed_br_step(const CournotParams& p, const SigmoidBumpPerturbation& pert,
                          const Profile& a, double tol = 1e-10, int max_iters = 200);

/// delta1 = sqrt(L1^2 + L2^2) with L_i the dense-grid max of ||grad du_i||
/// times a safety factor.
double delta1_bound(const SigmoidBumpPerturbation& pert, const Box& box, int grid_per_axis = 400,
                    double safety = 1.05);

/// Smooth-game views (analytic best responses, declared Lipschitz constants).
SmoothGame nominal_game(const CournotParams& p);
SmoothGame perturbed_game(const CournotParams& p, const SigmoidBumpPerturbation& pert);

enum class CournotMode { repeated, sequential };

struct CournotExperimentConfig {
  CournotParams params{};
  std::optional<std::array<double, 2>> mu;  // nullopt: the nominal NE
  std::vector<Profile> starts;              // empty: default_starts(params.a_bar)
  CournotMode mode = CournotMode::repeated;
  int max_steps = 200;
  int delta1_grid = 400;
  int tail_from = 7;  // tail view of the figures starts here
};

struct CournotExperimentReport {
  CournotParams params;
  std::array<double, 2> mu{};
  CournotMode mode = CournotMode::repeated;
  Profile x_tilde;      // nominal fixed point
  double delta1 = 0.0;
  double radius = 0.0;  // 2 * delta1 trap circle
  int tail_from = 7;
  std::vector<Profile> starts;
  std::vector<Trajectory> nominal;
  std::vector<Trajectory> perturbed;
  std::vector<TrapReport> nominal_trap;
  std::vector<TrapReport> perturbed_trap;
};

/// Default initial states: the 3x3 grid over [0, a_bar]^2 minus its center.
std::vector<Profile> default_starts(double a_bar);

/// Nominal + perturbed dynamics from every start in the requested mode,
/// with the trap-circle verification attached.
CournotExperimentReport run_experiment(const CournotExperimentConfig& config);

/// One dynamics run (pert == nullptr for the nominal game), diagnostics and
/// Taylor residuals populated.
Trajectory run_cournot_dynamics(const CournotParams& p, const SigmoidBumpPerturbation* pert,
                                const Profile& x0, CournotMode mode, int max_steps);

}  // namespace gamedyn
