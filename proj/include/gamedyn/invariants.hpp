#pragma once

#include <optional>
#include <vector>

#include "gamedyn/dynamics.hpp"
#include "gamedyn/game.hpp"

namespace gamedyn {

/// Mixed-extension indicator weights, one vector per player over that
/// player's actions, values in [0,1]. Trajectory states induce one-hot rows.
using IndicatorVector = std::vector<std::vector<double>>;

IndicatorVector one_hot_indicator(const FiniteGame& game, const IndexProfile& a);

/// U(f) = sum_a phi(a) f_1(a_1) ... f_N(a_N).
double mixed_potential_U(const FiniteGame& game, const std::vector<double>& phi_table,
                         const IndicatorVector& f);

/// Exact cross-term remainder of the one-step Taylor expansion of phi:
/// k = |phi(x') - phi(x) - sum_m [phi(x'_m, x_-m) - phi(x)]|.
/// Zero whenever at most one coordinate changes.
double taylor_residual_k(const FiniteGame& game, const std::vector<double>& phi_table,
                         const IndexProfile& x, const IndexProfile& x_next);
double taylor_residual_k(const Evaluator& phi, const Profile& x, const Profile& x_next);

/// Fill StepInfo::k for every step from the given potential.
void annotate_residuals(Trajectory& trajectory, const FiniteGame& game,
                        const std::vector<double>& phi_table);
void annotate_residuals(Trajectory& trajectory, const Evaluator& phi);

struct Lemma6Violation {
  int t = 0;
  double lhs = 0.0;  // phi(x^{t+1}) - phi(x^t)
  double rhs = 0.0;  // eps - N*delta - k^t
};

struct Lemma6Report {
  std::vector<Lemma6Violation> violations;
  int steps_outside = 0;  // steps with x^t outside the eps-NE set
};

/// For every step with x^t outside the eps-NE set of the (perturbed) game,
/// check phi(x^{t+1}) - phi(x^t) >= eps - N*delta - k^t.
Lemma6Report lemma6_check(const FiniteGame& game, const Trajectory& trajectory,
                          const std::vector<double>& phi_table, double delta, double eps);

/// L0 = max_m 2 L_{u_m}. Analytic when every player declares a constant,
/// sampled (pairwise over the action grid / lipschitz_estimate) otherwise.
LipschitzBound l_zero(const FiniteGame& game);
LipschitzBound l_zero(const SmoothGame& game, int sample_count = 2048, std::uint64_t seed = 0);

/// Whether y lies in the (alpha + L0*||x-y||)-NE set, given x in the alpha-NE
/// set (checked; violating the premise is a domain error).
bool lemma7_check(const FiniteGame& game, const IndexProfile& x, const IndexProfile& y,
                  double alpha, double L0);
bool lemma7_check(const SmoothGame& game, const Profile& x, const Profile& y, double alpha,
                  double L0);

enum class TailMode { sup, limsup_windowed };

/// Invariant potential-level set of the repeated-game dynamics:
/// C = { x : phi(x) >= min_{y in X_{R5}} phi(y) } with
/// R4 = N*delta + sup_k + eps and R5 = R4 + L0 * sup_w, the sups taken over
/// t >= T0 (mode sup) or over a trailing window (mode limsup_windowed, where
/// R5 plays the role of R6).
struct InvariantSetSpec {
  int players = 0;
  double delta = 0.0;
  double sup_k = 0.0;
  double sup_w = 0.0;
  double L0 = 0.0;
  Provenance l0_provenance = Provenance::sampled;
  double epsilon = 0.0;
  double R4 = 0.0;
  double R5 = 0.0;
  TailMode mode = TailMode::sup;
  int T0 = 0;
  double phi_threshold = 0.0;
  Profile threshold_witness;
  int grid_per_axis = 0;  // 0 = exact enumeration over the finite action space
  double window_fraction = 0.5;

  bool contains(double phi_value) const { return phi_value >= phi_threshold; }
};

InvariantSetSpec build_invariant_set(const FiniteGame& game, const std::vector<double>& phi_table,
                                     const Trajectory& trajectory, int T0, double eps,
                                     TailMode mode, double window_fraction = 0.5);

/// Smooth variant: the threshold minimum runs over a uniform grid on the box
/// with eps-NE membership tested through nu. Requires declared action grids
/// (for the potential-residual delta and the inner maximization).
InvariantSetSpec build_invariant_set(const SmoothGame& game, const Evaluator& phi,
                                     const Trajectory& trajectory, int T0, double eps,
                                     TailMode mode, int grid_per_axis = 200,
                                     double window_fraction = 0.5);

struct Theorem4Report {
  std::optional<int> entry_index;        // first T1 >= T0 with x^{T1} in C
  std::vector<int> post_entry_violations;
  std::optional<int> first_r4_visit;     // first t >= T0 with x^t in X_{R4}
};

Theorem4Report theorem4_verify(const FiniteGame& game, const std::vector<double>& phi_table,
                               const Trajectory& trajectory, const InvariantSetSpec& spec);
Theorem4Report theorem4_verify(const SmoothGame& game, const Evaluator& phi,
                               const Trajectory& trajectory, const InvariantSetSpec& spec);

}  // namespace gamedyn
