#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gamedyn/game.hpp"

namespace gamedyn {

enum class RuleKind { sequential_best, sequential_better, simultaneous_best };
enum class Schedule { round_robin_eligible, seeded_random_eligible };
enum class BetterSelector { first_improving, max_improving };

struct UpdateRule {
  RuleKind kind = RuleKind::sequential_best;
  Schedule schedule = Schedule::round_robin_eligible;
  BetterSelector selector = BetterSelector::first_improving;
};

inline constexpr int kMoverAll = -1;   // simultaneous step
inline constexpr int kMoverNone = -2;  // fixed-point repeat appended at the end

struct StepInfo {
  int mover = kMoverAll;
  double w = 0.0;            // ||x^{t+1} - x^t||
  double k = 0.0;            // Taylor cross-term residual; filled by annotate_residuals
  double improvement = 0.0;  // mover's utility gain (max unilateral gain when simultaneous)
  bool clamped = false;      // a root solve was clamped at the boundary this step
};

struct Trajectory {
  std::vector<Profile> states;
  std::vector<IndexProfile> index_states;  // parallel to states; finite games only
  std::vector<StepInfo> steps;             // steps[t] describes states[t] -> states[t+1]
  bool finite = false;

  int length() const { return static_cast<int>(states.size()); }
  int players() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

struct StopSpec {
  int max_steps = 1000;
  bool stop_on_cycle = true;       // finite games: stop at the first profile recurrence
  double fixed_point_tol = 1e-10;  // smooth games
  int fixed_point_window = 3;      // consecutive small steps required
};

double profile_distance(const Profile& a, const Profile& b);

// --- single steps ------------------------------------------------------

/// Best response of one player; ties go to the lowest action index and the
/// incumbent stays when already optimal.
IndexProfile step_sequential_best(const FiniteGame& game, const IndexProfile& a, int player);

/// Strictly improving move per the selector, or nullopt when none exists.
std::optional<IndexProfile> step_sequential_better(const FiniteGame& game, const IndexProfile& a,
                                                   int player, BetterSelector selector);

/// All players respond simultaneously to a's other coordinates.
IndexProfile step_simultaneous_best(const FiniteGame& game, const IndexProfile& a);

Profile step_sequential_best(const SmoothGame& game, const Profile& a, int player);
Profile step_simultaneous_best(const SmoothGame& game, const Profile& a);

// --- iteration ---------------------------------------------------------

Trajectory iterate(const FiniteGame& game, const UpdateRule& rule, const IndexProfile& x0,
                   const StopSpec& stop, std::uint64_t seed = 0);
Trajectory iterate(const SmoothGame& game, const UpdateRule& rule, const Profile& x0,
                   const StopSpec& stop, std::uint64_t seed = 0);

/// Vanishing estimation-error schedule (Assumption: accuracy improves with
/// time). At step n the update is applied to clamp(x^n + e_n) with ||e_n||
/// following the schedule and a seeded uniform direction on the sphere.
struct EstimatorSpec {
  enum class Kind { geometric, harmonic };
  Kind kind = Kind::geometric;
  double rho = 0.5;        // geometric: ||e_n|| = magnitude * rho^n
  double magnitude = 0.0;
  double c = 1.0;          // harmonic: ||e_n|| = c / (n + 1)
  double norm_at(int n) const;
  void validate() const;
};

Trajectory estimated_response_iterate(const SmoothGame& game, const UpdateRule& rule,
                                      const Profile& x0, const EstimatorSpec& estimator,
                                      std::uint64_t seed, int max_steps,
                                      const StopSpec& stop = {});

// --- cycle analysis ----------------------------------------------------

enum class CycleKind { fixed_point, cycle, undetermined };

struct CycleReport {
  CycleKind kind = CycleKind::undetermined;
  int entry = -1;  // l0: first index of the recurrent segment
  int period = 0;  // pi
  std::vector<IndexProfile> cycle_states;
};

/// First recurrence of a joint action profile via exact index hashing.
/// Finite-game trajectories only.
CycleReport detect_cycle(const Trajectory& trajectory);

struct Theorem2Report {
  bool resolved = false;  // detect_cycle reached a verdict
  bool holds = false;
  double delta = 0.0;      // potential residual of the perturbed game vs phi
  int period = 0;
  int entry = -1;
  double eps_cycle = 0.0;  // period * delta
  double eps_bound = 0.0;  // delta * |A|
  bool fixed_point_is_ne = false;
  bool alpha_inequality_ok = true;  // period*delta > alpha_r for every cycle step
  std::vector<double> alphas;
  struct Witness {
    IndexProfile state;
    double max_gain = 0.0;
    bool in_cycle_eps = false;  // max_gain <= period*delta
    bool in_bound_eps = false;  // max_gain <= delta*|A|
  };
  std::vector<Witness> witnesses;
};

/// Check the near-potential convergence claim on a resolved sequential
/// trajectory of the perturbed game: a fixed point must be a NE, a cycle must
/// sit inside the delta*|A|-NE set. The per-state period*delta membership and
/// the period*delta > alpha_r inequality are reported alongside.
Theorem2Report verify_theorem2(const FiniteGame& perturbed_game,
                               const std::vector<double>& phi_table,
                               const Trajectory& trajectory);

}  // namespace gamedyn
