#include "gamedyn/contraction.hpp"

#include <algorithm>
#include <cmath>

namespace gamedyn {

Profile ContractiveMap::operator()(const Profile& x) const {
  Profile z = base(x);
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = anchor[i] + alpha * (z[i] - anchor[i]);
  return z;
}

ContractionBuild build_contraction(const VectorMap& z, const std::vector<Profile>& domain_samples,
                                   AnchorPolicy anchor_policy, double margin) {
  if (!z) throw Error::config("build_contraction: null map");
  if (domain_samples.empty()) throw Error::domain("build_contraction: empty sample set");
  if (domain_samples.size() < 2)
    throw Error::domain("build_contraction: need at least 2 samples spanning the domain");
  if (!(margin > 0.0 && margin < 1.0))
    throw Error::domain("build_contraction: margin must lie in (0,1)");

  const std::size_t dim = domain_samples.front().size();
  std::vector<Profile> images(domain_samples.size());
  for (std::size_t i = 0; i < domain_samples.size(); ++i) {
    if (domain_samples[i].size() != dim)
      throw Error::shape("build_contraction: inconsistent sample dimensions");
    images[i] = z(domain_samples[i]);
  }

  double lhat = 0.0;
  for (std::size_t i = 0; i < domain_samples.size(); ++i) {
    for (std::size_t j = i + 1; j < domain_samples.size(); ++j) {
      const double dx = profile_distance(domain_samples[i], domain_samples[j]);
      if (dx <= 1e-12) continue;
      lhat = std::max(lhat, profile_distance(images[i], images[j]) / dx);
    }
  }

  Profile anchor(dim, 0.0);
  if (anchor_policy == AnchorPolicy::centroid) {
    for (const auto& s : domain_samples)
      for (std::size_t i = 0; i < dim; ++i) anchor[i] += s[i];
    for (auto& v : anchor) v /= static_cast<double>(domain_samples.size());
  } else {
    // rough fixed-point guess: iterate Z from the centroid until steps stall
    for (const auto& s : domain_samples)
      for (std::size_t i = 0; i < dim; ++i) anchor[i] += s[i];
    for (auto& v : anchor) v /= static_cast<double>(domain_samples.size());
    Profile prev = anchor;
    for (int it = 0; it < 200; ++it) {
      Profile next = z(anchor);
      const double step = profile_distance(next, anchor);
      const double prev_step = profile_distance(anchor, prev);
      prev = anchor;
      anchor = std::move(next);
      if (step <= 1e-12) break;
      if (it > 0 && step > 4.0 * prev_step) {  // diverging; keep the last sane point
        anchor = prev;
        break;
      }
    }
  }

  ContractionBuild out;
  out.map.base = z;
  out.map.anchor = anchor;
  out.map.base_lipschitz = lhat;
  out.map.alpha = (lhat <= 1.0 - margin) ? 1.0 : (1.0 - margin) / lhat;

  double max_dist = 0.0;
  for (const auto& img : images) max_dist = std::max(max_dist, profile_distance(img, anchor));
  out.delta2 = (1.0 - out.map.alpha) * max_dist;
  return out;
}

FixedPointResult fixed_point(const ContractiveMap& c, const Profile& x0, double tol,
                             int max_iters) {
  const double L = c.lipschitz();
  if (!(L < 1.0)) throw Error::domain("fixed_point: estimated Lipschitz constant must be < 1");
  if (max_iters < 1) throw Error::domain("fixed_point: max_iters must be at least 1");

  const double factor = L / (1.0 - L);
  Profile x = x0;
  double residual = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Profile next = c(x);
    residual = factor * profile_distance(next, x);
    x = std::move(next);
    if (residual <= tol) return {std::move(x), residual, it};
  }
  throw Error::convergence("fixed_point: not converged after " + std::to_string(max_iters) +
                           " iterations; last residual bound " + std::to_string(residual));
}

TheoremOneBounds theorem1_radii(double delta1, double delta2, double L_C) {
  if (delta1 < 0.0 || delta2 < 0.0) throw Error::domain("theorem1_radii: deltas must be >= 0");
  if (!(L_C >= 0.0 && L_C < 1.0)) throw Error::domain("theorem1_radii: L_C must lie in [0,1)");
  TheoremOneBounds b;
  b.delta1 = delta1;
  b.delta2 = delta2;
  b.L_C = L_C;
  const double denom = 1.0 - L_C;
  b.r_Z = delta2 / denom;
  b.r_K = (delta1 + delta2) / denom;
  b.r_tilde = (2.0 * delta2 + delta1) / denom;
  return b;
}

double theorem1_part2_radius(int m, int r, double L_C, double L_K, double L_Kr, double delta1,
                             double dist_Kr) {
  if (!(0 < r && r < m)) throw Error::domain("theorem1_part2_radius: need 0 < r < m");
  if (!(L_C >= 0.0 && L_C < 1.0))
    throw Error::domain("theorem1_part2_radius: L_C must lie in [0,1)");
  if (L_K == 1.0) throw Error::domain("theorem1_part2_radius: L_K must differ from 1");
  if (delta1 < 0.0 || L_Kr < 0.0 || dist_Kr < 0.0)
    throw Error::domain("theorem1_part2_radius: negative input");
  const double geom = (1.0 - std::pow(L_K, m)) / (1.0 - L_K);
  return L_Kr * geom * delta1 / (1.0 - L_C) + dist_Kr;
}

EstimatedResponseRadius estimated_response_radius(double delta1, double delta2, double L_C) {
  if (delta1 < 0.0 || delta2 < 0.0)
    throw Error::domain("estimated_response_radius: deltas must be >= 0");
  if (!(L_C >= 0.0 && L_C < 1.0))
    throw Error::domain("estimated_response_radius: L_C must lie in [0,1)");
  EstimatedResponseRadius out;
  out.radius = (delta1 + delta2) * (3.0 - 2.0 * L_C) / (1.0 - L_C);
  out.s_d_inflation = 2.0 * (delta1 + delta2);
  return out;
}

TrapReport verify_trap(const std::vector<Profile>& states, const Profile& center, double radius,
                       int burn_in) {
  if (states.empty()) throw Error::domain("verify_trap: empty trajectory");
  if (burn_in < 0 || burn_in >= static_cast<int>(states.size()))
    throw Error::domain("verify_trap: burn_in must be less than the trajectory length");
  if (radius < 0.0) throw Error::domain("verify_trap: radius must be nonnegative");

  const int n = static_cast<int>(states.size());
  int entry = -1;
  for (int t = n - 1; t >= burn_in; --t) {
    if (profile_distance(states[static_cast<std::size_t>(t)], center) > radius) break;
    entry = t;
  }

  TrapReport report;
  if (entry >= 0) report.all_inside_after = entry;
  const int tail_start = entry >= 0 ? entry : burn_in;
  double max_d = 0.0;
  for (int t = tail_start; t < n; ++t)
    max_d = std::max(max_d, profile_distance(states[static_cast<std::size_t>(t)], center));
  report.max_tail_distance = max_d;
  return report;
}

TrapReport verify_trap(const Trajectory& trajectory, const Profile& center, double radius,
                       int burn_in) {
  return verify_trap(trajectory.states, center, radius, burn_in);
}

Lemma1Report lemma1_limsup_bound(std::span<const double> p, std::span<const double> delta,
                                 double L_F, bool check_premise, double tail_fraction) {
  if (!(L_F >= 0.0 && L_F < 1.0)) throw Error::domain("lemma1: L_F must lie in [0,1)");
  if (p.empty() || delta.empty()) throw Error::domain("lemma1: empty sequence");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw Error::domain("lemma1: tail_fraction must lie in (0,1]");

  Lemma1Report report;
  const auto tail_sup = [tail_fraction](std::span<const double> s) {
    const std::size_t start =
        static_cast<std::size_t>(static_cast<double>(s.size()) * (1.0 - tail_fraction));
    double best = s[std::min(start, s.size() - 1)];
    for (std::size_t i = start; i < s.size(); ++i) best = std::max(best, s[i]);
    return best;
  };

  report.lhs = tail_sup(p);
  const double delta_tail = tail_sup(delta);
  report.rhs = delta_tail / (1.0 - L_F);
  report.rhs_tight = L_F * delta_tail / (1.0 - L_F);
  report.holds = report.lhs <= report.rhs + 1e-12;
  report.holds_tight = report.lhs <= report.rhs_tight + 1e-12;

  if (check_premise) {
    report.premise_checked = true;
    // p_n <= L_F^n p_0 + sum_{k=1}^{n-1} delta_k L_F^{n-k}
    const std::size_t n_max = std::min(p.size(), delta.size() + 1);
    for (std::size_t n = 1; n < n_max; ++n) {
      double bound = std::pow(L_F, static_cast<double>(n)) * p[0];
      for (std::size_t k = 1; k < n; ++k)
        bound += delta[k] * std::pow(L_F, static_cast<double>(n - k));
      if (p[n] > bound + 1e-12) {
        report.premise_ok = false;
        break;
      }
    }
  }
  return report;
}

Lemma0Report lemma0_limsup_utility(std::span<const double> seq, double eps,
                                   double tail_fraction) {
  if (seq.empty()) throw Error::domain("lemma0: empty sequence");
  if (!(eps >= 0.0)) throw Error::domain("lemma0: eps must be nonnegative");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw Error::domain("lemma0: tail_fraction must lie in (0,1]");

  Lemma0Report report;
  const std::size_t tail_start =
      static_cast<std::size_t>(static_cast<double>(seq.size()) * (1.0 - tail_fraction));
  double alpha = seq[std::min(tail_start, seq.size() - 1)];
  for (std::size_t i = tail_start; i < seq.size(); ++i) alpha = std::max(alpha, seq[i]);
  report.alpha = alpha;

  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] > alpha - eps) {
      ++report.count_above_minus;
      if (i >= tail_start) ++report.tail_count_above_minus;
    }
    if (seq[i] > alpha + eps) {
      ++report.count_above_plus;
      report.last_above_plus = static_cast<int>(i);
    }
  }
  return report;
}

ContractionCertificate certify(const VectorMap& z, const std::vector<Profile>& samples,
                               AnchorPolicy anchor_policy, double margin, double delta1,
                               double fp_tol, int fp_max_iters, std::string domain_spec) {
  const ContractionBuild build = build_contraction(z, samples, anchor_policy, margin);
  const FixedPointResult fp = fixed_point(build.map, build.map.anchor, fp_tol, fp_max_iters);

  ContractionCertificate cert;
  cert.L_C = build.map.lipschitz();
  cert.delta1 = delta1;
  cert.delta2 = build.delta2;
  cert.alpha = build.map.alpha;
  cert.anchor = build.map.anchor;
  cert.x_star = fp.x;
  cert.fixed_point_residual = fp.residual;
  cert.domain_spec = std::move(domain_spec);
  cert.sample_count = static_cast<int>(samples.size());
  return cert;
}

double measure_delta1(const VectorMap& k, const VectorMap& z,
                      const std::vector<Profile>& samples) {
  if (!k || !z) throw Error::config("measure_delta1: null map");
  if (samples.empty()) throw Error::domain("measure_delta1: empty sample set");
  double worst = 0.0;
  for (const auto& x : samples) worst = std::max(worst, profile_distance(k(x), z(x)));
  return worst;
}

VectorMap finite_br_map(const FiniteGame& game) {
  const FiniteGame* g = &game;
  return [g](const Profile& x) {
    const IndexProfile a = g->nearest_indices(x);
    return g->coords(step_simultaneous_best(*g, a));
  };
}

std::vector<Profile> contraction_domain_samples(const FiniteGame& game, const std::string& spec) {
  std::vector<Profile> samples;
  if (spec == "all") {
    for (std::size_t f = 0; f < game.joint_count(); ++f)
      samples.push_back(game.coords(game.unflatten(f)));
    return samples;
  }
  if (spec.rfind("eps:", 0) == 0) {
    const double eps = std::stod(spec.substr(4));
    for (const auto& a : epsilon_ne_set(game, eps)) samples.push_back(game.coords(a));
    if (samples.size() < 2)
      throw Error::resolution("contraction domain: the eps-NE set has fewer than 2 profiles");
    return samples;
  }
  if (spec.rfind("box:", 0) == 0) {
    const std::string body = spec.substr(4);
    const auto colon = body.rfind(':');
    if (colon == std::string::npos)
      throw Error::config("contraction domain: box spec must end with :<points-per-axis>");
    const int per_axis = std::stoi(body.substr(colon + 1));
    if (per_axis < 2)
      throw Error::config("contraction domain: need at least 2 points per axis");
    std::vector<double> bounds;
    std::size_t pos = 0;
    const std::string nums = body.substr(0, colon);
    while (pos < nums.size()) {
      std::size_t eaten = 0;
      bounds.push_back(std::stod(nums.substr(pos), &eaten));
      pos += eaten;
      if (pos < nums.size() && nums[pos] == ',') ++pos;
    }
    if (static_cast<int>(bounds.size()) != 2 * game.players())
      throw Error::config("contraction domain: box spec needs lo,hi per player");
    const int dim = game.players();
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(per_axis);
    for (std::size_t g = 0; g < total; ++g) {
      std::size_t rem = g;
      Profile p(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i) {
        const std::size_t idx = rem % static_cast<std::size_t>(per_axis);
        rem /= static_cast<std::size_t>(per_axis);
        const double lo = bounds[static_cast<std::size_t>(2 * i)];
        const double hi = bounds[static_cast<std::size_t>(2 * i + 1)];
        p[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(idx) / (per_axis - 1);
      }
      samples.push_back(std::move(p));
    }
    return samples;
  }
  throw Error::config("contraction domain: unknown spec \"" + spec + "\"");
}

}  // namespace gamedyn
