#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamedyn/dynamics.hpp"
#include "gamedyn/game.hpp"

namespace gamedyn {

using VectorMap = std::function<Profile(const Profile&)>;

/// Contractive proxy for a dynamics map Z: C(x) = c0 + alpha * (Z(x) - c0).
/// The estimated Lipschitz constant of C is alpha * Lhat_Z.
struct ContractiveMap {
  VectorMap base;
  Profile anchor;
  double alpha = 1.0;
  double base_lipschitz = 0.0;  // Lhat_Z over the domain samples

  double lipschitz() const { return alpha * base_lipschitz; }
  Profile operator()(const Profile& x) const;
};

enum class AnchorPolicy { centroid, fixed_point_guess };

struct ContractionBuild {
  ContractiveMap map;
  double delta2 = 0.0;  // max over samples of ||Z(x) - C(x)||
};

/// Scaling construction: estimate Lhat_Z over sample pairs, pick
/// alpha = 1 when Lhat_Z <= 1 - margin, else (1 - margin) / Lhat_Z, and
/// report delta2 = (1 - alpha) * max ||Z(x) - c0||.
ContractionBuild build_contraction(const VectorMap& z, const std::vector<Profile>& domain_samples,
                                   AnchorPolicy anchor_policy, double margin);

struct FixedPointResult {
  Profile x;
  double residual = 0.0;  // a-posteriori bound L/(1-L) * ||x_{n+1} - x_n||
  int iterations = 0;
};

/// Banach iteration; stops when the a-posteriori bound drops below tol.
FixedPointResult fixed_point(const ContractiveMap& c, const Profile& x0, double tol,
                             int max_iters);

struct TheoremOneBounds {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double L_C = 0.0;
  double r_Z = 0.0;      // delta2 / (1 - L_C)
  double r_K = 0.0;      // (delta1 + delta2) / (1 - L_C)
  double r_tilde = 0.0;  // (2*delta2 + delta1) / (1 - L_C)

  struct Part2 {
    int m = 0;
    double L_K = 0.0;
    std::vector<double> L_Kr;  // per r in 1..m-1
    std::vector<double> R_r;
    double max_R_r = 0.0;
  };
  std::optional<Part2> part2;
};

TheoremOneBounds theorem1_radii(double delta1, double delta2, double L_C);

/// R_r = L_{K^r} (1 - L_K^m) delta1 / ((1 - L_C)(1 - L_K)) + ||K^r(x~) - x~||.
double theorem1_part2_radius(int m, int r, double L_C, double L_K, double L_Kr, double delta1,
                             double dist_Kr);

struct EstimatedResponseRadius {
  double radius = 0.0;         // (delta1 + delta2)(3 - 2 L_C) / (1 - L_C)
  double s_d_inflation = 0.0;  // 2 (delta1 + delta2)
};

EstimatedResponseRadius estimated_response_radius(double delta1, double delta2, double L_C);

struct TrapReport {
  std::optional<int> all_inside_after;  // first index from which every state stays in the ball
  double max_tail_distance = 0.0;
};

/// Empirical trap check against the closed ball N_radius[center].
TrapReport verify_trap(const std::vector<Profile>& states, const Profile& center, double radius,
                       int burn_in);
TrapReport verify_trap(const Trajectory& trajectory, const Profile& center, double radius,
                       int burn_in);

struct Lemma1Report {
  bool holds = false;       // lhs <= rhs with the statement constant 1/(1-L_F)
  bool holds_tight = false; // proof constant L_F/(1-L_F)
  double lhs = 0.0;         // tail-sup of p
  double rhs = 0.0;
  double rhs_tight = 0.0;
  bool premise_checked = false;
  bool premise_ok = true;   // p_n <= L_F^n p_0 + sum delta_k L_F^{n-k} on the prefix
};

Lemma1Report lemma1_limsup_bound(std::span<const double> p, std::span<const double> delta,
                                 double L_F, bool check_premise = true,
                                 double tail_fraction = 0.5);

struct Lemma0Report {
  double alpha = 0.0;            // tail-sup surrogate for limsup
  int count_above_minus = 0;     // indices with seq > alpha - eps
  int tail_count_above_minus = 0;
  int count_above_plus = 0;      // indices with seq > alpha + eps
  int last_above_plus = -1;
};

/// Finite-prefix sanity counts for the limsup characterization; test utility.
Lemma0Report lemma0_limsup_utility(std::span<const double> seq, double eps,
                                   double tail_fraction = 0.5);

struct ContractionCertificate {
  double L_C = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double alpha = 1.0;
  Profile anchor;
  Profile x_star;
  double fixed_point_residual = 0.0;
  std::string domain_spec;
  int sample_count = 0;

  TheoremOneBounds bounds() const { return theorem1_radii(delta1, delta2, L_C); }
};

/// build_contraction + fixed_point in one pass.
ContractionCertificate certify(const VectorMap& z, const std::vector<Profile>& samples,
                               AnchorPolicy anchor_policy, double margin, double delta1 = 0.0,
                               double fp_tol = 1e-10, int fp_max_iters = 100000,
                               std::string domain_spec = "samples");

/// sup over samples of ||K(x) - Z(x)||; the sampled fallback for delta1.
double measure_delta1(const VectorMap& k, const VectorMap& z,
                      const std::vector<Profile>& samples);

/// Simultaneous best-response map of a finite game over real coordinates
/// (inputs snapped to the nearest declared actions).
VectorMap finite_br_map(const FiniteGame& game);

/// Sample set for D' from a spec string: "all" (every joint profile),
/// "eps:<value>" (the eps-NE set), or "box:lo1,hi1,...,loN,hiN:<points>".
std::vector<Profile> contraction_domain_samples(const FiniteGame& game, const std::string& spec);

}  // namespace gamedyn
