#include "gamedyn/cournot.hpp"

#include <algorithm>
#include <cmath>

#include "gamedyn/invariants.hpp"

namespace gamedyn {

void CournotParams::validate() const {
  if (!(c1 >= 0.0 && c2 >= 0.0)) throw Error::domain("cournot: costs must be nonnegative");
  if (!(d >= std::max(c1, c2))) throw Error::domain("cournot: demand intercept must cover costs");
  if (!(a_bar > 0.0)) throw Error::domain("cournot: a_bar must be positive");
}

double cournot_utility(const CournotParams& p, int player, const Profile& a) {
  if (player < 0 || player > 1) throw Error::domain("cournot: player must be 0 or 1");
  if (a.size() != 2) throw Error::shape("cournot: profile must have 2 coordinates");
  const double price = std::max(p.d - a[0] - a[1], 0.0);
  return a[static_cast<std::size_t>(player)] * (price - p.cost(player));
}

Profile cournot_ne(const CournotParams& p) {
  return {(p.d - 2.0 * p.c1 + p.c2) / 3.0, (p.d - 2.0 * p.c2 + p.c1) / 3.0};
}

double nominal_br_action(const CournotParams& p, int player, const Profile& a) {
  if (player < 0 || player > 1) throw Error::domain("cournot: player must be 0 or 1");
  const double other = a[static_cast<std::size_t>(1 - player)];
  return std::max(0.0, (p.d - other - p.cost(player)) / 2.0);
}

Profile nominal_br_step(const CournotParams& p, const Profile& a) {
  return {nominal_br_action(p, 0, a), nominal_br_action(p, 1, a)};
}

double cournot_potential(const CournotParams& p, const Profile& a) {
  return p.d * (a[0] + a[1]) - (a[0] * a[0] + a[1] * a[1]) - a[0] * a[1] - p.c1 * a[0] -
         p.c2 * a[1];
}

double taylor_M(const CournotParams& p, double abar1, double abar2,
                std::optional<double> c_override) {
  if (!(abar1 > 0.0 && abar2 > 0.0)) throw Error::domain("taylor_M: bounds must be positive");
  const double c = c_override.value_or((p.c1 + p.c2) / 2.0);
  const double term1 = (p.d - c) * (abar1 * abar1 * abar2 + abar1 * abar2 * abar2) / 2.0;
  const double term2 = (abar1 * abar1 * abar1 * abar2 + abar1 * abar2 * abar2 * abar2) / 3.0 +
                       abar1 * abar1 * abar2 * abar2 / 4.0;
  return std::abs(term1 - term2);
}

double cournot_utility_lipschitz(const CournotParams& p, int player, const Box& box) {
  if (player < 0 || player > 1) throw Error::domain("cournot: player must be 0 or 1");
  box.validate();
  if (box.dim() != 2) throw Error::shape("cournot: box must be two-dimensional");

  // ||grad u_i||^2 on the P>0 piece is convex, so its max over the polytope
  // {box, a1+a2 <= d} is attained at a vertex.
  const auto grad_norm2 = [&](double a1, double a2) {
    if (player == 0) {
      const double g1 = p.d - 2.0 * a1 - a2 - p.c1;
      return g1 * g1 + a1 * a1;
    }
    const double g2 = p.d - a1 - 2.0 * a2 - p.c2;
    return a2 * a2 + g2 * g2;
  };

  std::vector<std::array<double, 2>> vertices;
  const double lo1 = box.lo[0], hi1 = box.hi[0], lo2 = box.lo[1], hi2 = box.hi[1];
  for (double a1 : {lo1, hi1})
    for (double a2 : {lo2, hi2})
      if (a1 + a2 <= p.d) vertices.push_back({a1, a2});
  // intersections of a1 + a2 = d with the box edges
  for (double a1 : {lo1, hi1}) {
    const double a2 = p.d - a1;
    if (a2 >= lo2 && a2 <= hi2) vertices.push_back({a1, a2});
  }
  for (double a2 : {lo2, hi2}) {
    const double a1 = p.d - a2;
    if (a1 >= lo1 && a1 <= hi1) vertices.push_back({a1, a2});
  }

  double best2 = 0.0;
  for (const auto& v : vertices) best2 = std::max(best2, grad_norm2(v[0], v[1]));
  double best = std::sqrt(best2);
  if (lo1 + lo2 < p.d && hi1 + hi2 > p.d)  // the P=0 piece intersects the box
    best = std::max(best, p.cost(player));
  if (lo1 + lo2 >= p.d) best = p.cost(player);  // box entirely in the P=0 piece
  return best;
}

// --- perturbation --------------------------------------------------------

double SigmoidBumpPerturbation::delta_u(const Profile& a) const {
  const double d1 = a[0] - mu1;
  const double d2 = a[1] - mu2;
  const double s = d1 * d1 + d2 * d2;
  return 1.0 / (1.0 + std::exp(-s * s));
}

std::array<double, 2> SigmoidBumpPerturbation::half_gradients(const Profile& a) const {
  const double d1 = a[0] - mu1;
  const double d2 = a[1] - mu2;
  const double s = d1 * d1 + d2 * d2;
  const double e = std::exp(-s * s);
  const double denom = (1.0 + e) * (1.0 + e);
  return {2.0 * d1 * s * e / denom, 2.0 * d2 * s * e / denom};
}

std::array<double, 2> SigmoidBumpPerturbation::gradient(const Profile& a) const {
  const auto h = half_gradients(a);
  return {2.0 * h[0], 2.0 * h[1]};
}

RootSolveResult perturbed_br_action(const CournotParams& p, const SigmoidBumpPerturbation& pert,
                                    int player, const Profile& a, double tol, int max_iters) {
  if (player < 0 || player > 1) throw Error::domain("cournot: player must be 0 or 1");
  const double other = a[static_cast<std::size_t>(1 - player)];
  const double nominal = (p.d - other - p.cost(player)) / 2.0;

  const auto residual_at = [&](double z) {
    Profile probe(2);
    probe[static_cast<std::size_t>(player)] = z;
    probe[static_cast<std::size_t>(1 - player)] = other;
    return -z + nominal + pert.half_gradients(probe)[static_cast<std::size_t>(player)];
  };

  const double f0 = residual_at(0.0);
  if (f0 < 0.0) return {0.0, 0.0, 0, true};  // root is negative: clamp per the update rule

  double lo = 0.0, hi = p.d;
  double flo = f0, fhi = residual_at(hi);
  if (fhi > 0.0)
    throw Error::convergence("perturbed_br_action: no sign change on [0, d] (F(d) = " +
                             std::to_string(fhi) + ")");

  double z = std::clamp(nominal, lo, hi);
  double fz = residual_at(z);
  for (int it = 1; it <= max_iters; ++it) {
    if (std::abs(fz) <= tol) return {z, std::abs(fz), it, false};
    if (fz > 0.0) {
      lo = z;
      flo = fz;
    } else {
      hi = z;
      fhi = fz;
    }

    const double h = 1e-6 * std::max(1.0, std::abs(z));
    const double dfz = (residual_at(z + h) - residual_at(z - h)) / (2.0 * h);
    double z_next;
    if (std::abs(dfz) > 1e-12) {
      z_next = z - fz / dfz;
      if (!(z_next > lo && z_next < hi)) z_next = 0.5 * (lo + hi);
    } else {
      z_next = 0.5 * (lo + hi);
    }
    z = z_next;
    fz = residual_at(z);
    if (hi - lo <= 1e-15 * p.d) return {z, std::abs(fz), it, false};
  }
  (void)flo;
  (void)fhi;
  throw Error::convergence("perturbed_br_action: Newton/bisection did not reach tolerance " +
                           std::to_string(tol) + " in " + std::to_string(max_iters) +
                           " iterations (last residual " + std::to_string(std::abs(fz)) + ")");
}

Profile perturbed_br_step(const CournotParams& p, const SigmoidBumpPerturbation& pert,
                          const Profile& a, double tol, int max_iters) {
  return {perturbed_br_action(p, pert, 0, a, tol, max_iters).root,
          perturbed_br_action(p, pert, 1, a, tol, max_iters).root};
}

double delta1_bound(const SigmoidBumpPerturbation& pert, const Box& box, int grid_per_axis,
                    double safety) {
  box.validate();
  if (box.dim() != 2) throw Error::shape("delta1_bound: box must be two-dimensional");
  if (grid_per_axis < 2) throw Error::domain("delta1_bound: grid must have at least 2 points");
  double worst = 0.0;
  Profile a(2);
  for (int i = 0; i < grid_per_axis; ++i) {
    a[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * i / (grid_per_axis - 1);
    for (int j = 0; j < grid_per_axis; ++j) {
      a[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * j / (grid_per_axis - 1);
      const auto g = pert.gradient(a);
      worst = std::max(worst, std::sqrt(g[0] * g[0] + g[1] * g[1]));
    }
  }
  const double l_each = safety * worst;  // du_1 == du_2, so both constants agree
  return std::sqrt(2.0 * l_each * l_each);
}

SmoothGame nominal_game(const CournotParams& p) {
  p.validate();
  Box box{{0.0, 0.0}, {p.a_bar, p.a_bar}};
  std::vector<Evaluator> utilities = {
      [p](const Profile& a) { return cournot_utility(p, 0, a); },
      [p](const Profile& a) { return cournot_utility(p, 1, a); }};
  SmoothGame game(box, std::move(utilities));
  game.set_best_response(0, [p](const Profile& a) { return nominal_br_action(p, 0, a); });
  game.set_best_response(1, [p](const Profile& a) { return nominal_br_action(p, 1, a); });
  game.set_lipschitz(0, cournot_utility_lipschitz(p, 0, box));
  game.set_lipschitz(1, cournot_utility_lipschitz(p, 1, box));
  return game;
}

SmoothGame perturbed_game(const CournotParams& p, const SigmoidBumpPerturbation& pert) {
  p.validate();
  Box box{{0.0, 0.0}, {p.a_bar, p.a_bar}};
  std::vector<Evaluator> utilities = {
      [p, pert](const Profile& a) { return cournot_utility(p, 0, a) + pert.delta_u(a); },
      [p, pert](const Profile& a) { return cournot_utility(p, 1, a) + pert.delta_u(a); }};
  SmoothGame game(box, std::move(utilities));
  game.set_best_response(
      0, [p, pert](const Profile& a) { return perturbed_br_action(p, pert, 0, a).root; });
  game.set_best_response(
      1, [p, pert](const Profile& a) { return perturbed_br_action(p, pert, 1, a).root; });
  const double l_du = delta1_bound(pert, box) / std::sqrt(2.0);
  game.set_lipschitz(0, cournot_utility_lipschitz(p, 0, box) + l_du);
  game.set_lipschitz(1, cournot_utility_lipschitz(p, 1, box) + l_du);
  return game;
}

// --- experiment ----------------------------------------------------------

std::vector<Profile> default_starts(double a_bar) {
  std::vector<Profile> starts;
  const double mid = a_bar / 2.0;
  for (double a1 : {0.0, mid, a_bar})
    for (double a2 : {0.0, mid, a_bar}) {
      if (a1 == mid && a2 == mid) continue;
      starts.push_back({a1, a2});
    }
  return starts;
}

Trajectory run_cournot_dynamics(const CournotParams& p, const SigmoidBumpPerturbation* pert,
                                const Profile& x0, CournotMode mode, int max_steps) {
  p.validate();
  if (x0.size() != 2) throw Error::shape("cournot: initial profile must have 2 coordinates");
  if (max_steps < 1) throw Error::domain("cournot: max_steps must be at least 1");

  Trajectory traj;
  traj.states.push_back({std::clamp(x0[0], 0.0, p.a_bar), std::clamp(x0[1], 0.0, p.a_bar)});

  const auto utility_of = [&](int player, const Profile& a) {
    double u = cournot_utility(p, player, a);
    if (pert != nullptr) u += pert->delta_u(a);
    return u;
  };

  int quiet = 0;
  Profile cur = traj.states.front();
  for (int t = 0; t < max_steps; ++t) {
    StepInfo info;
    Profile next = cur;
    if (mode == CournotMode::repeated) {
      info.mover = kMoverAll;
      if (pert == nullptr) {
        next = nominal_br_step(p, cur);
      } else {
        const auto r0 = perturbed_br_action(p, *pert, 0, cur);
        const auto r1 = perturbed_br_action(p, *pert, 1, cur);
        next = {r0.root, r1.root};
        info.clamped = r0.clamped || r1.clamped;
      }
      double best_gain = 0.0;
      for (int i = 0; i < 2; ++i) {
        Profile uni = cur;
        uni[static_cast<std::size_t>(i)] = next[static_cast<std::size_t>(i)];
        best_gain = std::max(best_gain, utility_of(i, uni) - utility_of(i, cur));
      }
      info.improvement = best_gain;
    } else {
      const int player = t % 2;
      info.mover = player;
      double updated;
      if (pert == nullptr) {
        updated = nominal_br_action(p, player, cur);
      } else {
        const auto r = perturbed_br_action(p, *pert, player, cur);
        updated = r.root;
        info.clamped = r.clamped;
      }
      next[static_cast<std::size_t>(player)] = updated;
      info.improvement = utility_of(player, next) - utility_of(player, cur);
    }

    info.w = profile_distance(next, cur);
    traj.steps.push_back(info);
    traj.states.push_back(next);

    if (info.w <= 1e-10) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
    cur = next;
  }

  const Evaluator phi = [p](const Profile& a) { return cournot_potential(p, a); };
  annotate_residuals(traj, phi);
  return traj;
}

CournotExperimentReport run_experiment(const CournotExperimentConfig& config) {
  config.params.validate();
  if (config.max_steps < 1) throw Error::domain("experiment: max_steps must be at least 1");
  if (config.tail_from < 0) throw Error::domain("experiment: tail_from must be nonnegative");

  CournotExperimentReport report;
  report.params = config.params;
  report.mode = config.mode;
  report.tail_from = config.tail_from;
  report.x_tilde = cournot_ne(config.params);
  if (profile_distance(nominal_br_step(config.params, report.x_tilde), report.x_tilde) > 1e-9)
    throw Error{ErrKind::internal, "experiment: closed-form NE is not a fixed point"};

  const std::array<double, 2> mu =
      config.mu.value_or(std::array<double, 2>{report.x_tilde[0], report.x_tilde[1]});
  report.mu = mu;
  const SigmoidBumpPerturbation pert{mu[0], mu[1]};

  const Box box{{0.0, 0.0}, {config.params.a_bar, config.params.a_bar}};
  report.delta1 = delta1_bound(pert, box, config.delta1_grid);
  report.radius = 2.0 * report.delta1;

  report.starts = config.starts.empty() ? default_starts(config.params.a_bar) : config.starts;

  for (std::size_t s = 0; s < report.starts.size(); ++s) {
    const Profile& x0 = report.starts[s];
    const auto run_one = [&](const SigmoidBumpPerturbation* pp, const char* label) {
      try {
        return run_cournot_dynamics(config.params, pp, x0, config.mode, config.max_steps);
      } catch (const Error& e) {
        throw Error{e.kind(), std::string(label) + " trajectory " + std::to_string(s) +
                                  " from (" + std::to_string(x0[0]) + ", " +
                                  std::to_string(x0[1]) + "): " + e.what()};
      }
    };
    Trajectory nom = run_one(nullptr, "nominal");
    Trajectory per = run_one(&pert, "perturbed");
    const int burn_nom = std::min(config.tail_from, nom.length() - 1);
    const int burn_per = std::min(config.tail_from, per.length() - 1);
    report.nominal_trap.push_back(verify_trap(nom, report.x_tilde, report.radius, burn_nom));
    report.perturbed_trap.push_back(verify_trap(per, report.x_tilde, report.radius, burn_per));
    report.nominal.push_back(std::move(nom));
    report.perturbed.push_back(std::move(per));
  }
  return report;
}

}  // namespace gamedyn
