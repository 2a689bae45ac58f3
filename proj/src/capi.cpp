#include "gamedyn/gamedyn.h"

#include <cstring>
#include <string>

#include "gamedyn/run.hpp"
#include "gamedyn/serialize.hpp"
#include "gamedyn/verify.hpp"

using namespace gamedyn;

struct gd_game {
  FiniteGame game;
};

struct gd_potential {
  std::vector<double> table;
};

struct gd_trajectory {
  Trajectory trajectory;
};

struct gd_report {
  Json document;
  std::string cached;  // backing storage for gd_report_json
};

namespace {

thread_local std::string t_last_error;

gd_status status_of(const Error& e) {
  switch (e.kind()) {
    case ErrKind::invalid_argument: return GD_ERR_INVALID_ARGUMENT;
    case ErrKind::parse: return GD_ERR_PARSE;
    case ErrKind::domain: return GD_ERR_DOMAIN;
    case ErrKind::shape: return GD_ERR_SHAPE;
    case ErrKind::config: return GD_ERR_CONFIG;
    case ErrKind::convergence: return GD_ERR_CONVERGENCE;
    case ErrKind::resolution: return GD_ERR_RESOLUTION;
    case ErrKind::io: return GD_ERR_IO;
    case ErrKind::internal: return GD_ERR_INTERNAL;
  }
  return GD_ERR_INTERNAL;
}

template <typename Fn>
gd_status guarded(Fn&& fn) {
  try {
    fn();
    return GD_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GD_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return GD_ERR_INTERNAL;
  }
}

gd_status invalid_argument(const char* message) {
  t_last_error = message;
  return GD_ERR_INVALID_ARGUMENT;
}

gd_report* make_report(Json document) {
  auto* report = new gd_report{std::move(document), {}};
  report->cached = report->document.dump(2);
  return report;
}

}  // namespace

extern "C" {

const char* gd_version(void) { return "1.0.0"; }

const char* gd_status_name(gd_status status) {
  switch (status) {
    case GD_OK: return "ok";
    case GD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case GD_ERR_PARSE: return "parse_error";
    case GD_ERR_DOMAIN: return "domain_error";
    case GD_ERR_SHAPE: return "shape_error";
    case GD_ERR_CONFIG: return "config_error";
    case GD_ERR_CONVERGENCE: return "convergence_error";
    case GD_ERR_RESOLUTION: return "resolution_error";
    case GD_ERR_IO: return "io_error";
    case GD_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* gd_last_error(void) { return t_last_error.c_str(); }

/* --- games ------------------------------------------------------------- */

gd_status gd_game_load_file(const char* path, gd_game** out) {
  if (path == nullptr || out == nullptr) return invalid_argument("null argument");
  return guarded([&] { *out = new gd_game{load_finite_game(path)}; });
}

gd_status gd_game_parse(const char* text, gd_game** out) {
  if (text == nullptr || out == nullptr) return invalid_argument("null argument");
  return guarded([&] { *out = new gd_game{parse_finite_game(text)}; });
}

void gd_game_free(gd_game* game) { delete game; }

int gd_game_players(const gd_game* game) { return game == nullptr ? 0 : game->game.players(); }

int gd_game_action_count(const gd_game* game, int player) {
  if (game == nullptr || player < 0 || player >= game->game.players()) return 0;
  return game->game.action_count(player);
}

gd_status gd_game_action_value(const gd_game* game, int player, int index, double* out) {
  if (game == nullptr || out == nullptr) return invalid_argument("null argument");
  return guarded([&] { *out = game->game.action_value(player, index); });
}

gd_status gd_game_utility(const gd_game* game, int player, const int* action_indices,
                          double* out) {
  if (game == nullptr || action_indices == nullptr || out == nullptr)
    return invalid_argument("null argument");
  return guarded([&] {
    const IndexProfile a(action_indices,
                         action_indices + static_cast<std::size_t>(game->game.players()));
    *out = game->game.utility(player, a);
  });
}

gd_status gd_potential_load_file(const char* path, const gd_game* game, gd_potential** out) {
  if (path == nullptr || game == nullptr || out == nullptr)
    return invalid_argument("null argument");
  return guarded([&] { *out = new gd_potential{load_potential_table(path, game->game)}; });
}

gd_status gd_potential_parse(const char* text, const gd_game* game, gd_potential** out) {
  if (text == nullptr || game == nullptr || out == nullptr)
    return invalid_argument("null argument");
  return guarded([&] { *out = new gd_potential{parse_potential_table(text, game->game)}; });
}

void gd_potential_free(gd_potential* potential) { delete potential; }

gd_status gd_game_mpd(const gd_game* a, const gd_game* b, double* out) {
  if (a == nullptr || b == nullptr || out == nullptr) return invalid_argument("null argument");
  return guarded([&] { *out = mpd(a->game, b->game); });
}

gd_status gd_game_potential_residual(const gd_game* game, const gd_potential* potential,
                                     double* out) {
  if (game == nullptr || potential == nullptr || out == nullptr)
    return invalid_argument("null argument");
  return guarded([&] { *out = potential_residual(game->game, potential->table); });
}

gd_status gd_game_epsilon_ne_count(const gd_game* game, double eps, size_t* out) {
  if (game == nullptr || out == nullptr) return invalid_argument("null argument");
  return guarded([&] { *out = epsilon_ne_set(game->game, eps).size(); });
}

/* --- simulation ---------------------------------------------------------- */

gd_status gd_simulate(const gd_game* game, const gd_sim_options* options, const int* x0,
                      int x0_len, gd_trajectory** out) {
  if (game == nullptr || options == nullptr || x0 == nullptr || out == nullptr)
    return invalid_argument("null argument");
  if (x0_len != game->game.players())
    return invalid_argument("x0 length does not match the player count");
  return guarded([&] {
    UpdateRule rule;
    rule.kind = options->kind == GD_RULE_SEQUENTIAL_BEST      ? RuleKind::sequential_best
                : options->kind == GD_RULE_SEQUENTIAL_BETTER ? RuleKind::sequential_better
                                                             : RuleKind::simultaneous_best;
    rule.schedule = options->schedule == GD_SCHEDULE_SEEDED_RANDOM
                        ? Schedule::seeded_random_eligible
                        : Schedule::round_robin_eligible;
    rule.selector = options->selector == GD_SELECTOR_MAX_IMPROVING
                        ? BetterSelector::max_improving
                        : BetterSelector::first_improving;
    StopSpec stop;
    stop.max_steps = options->max_steps;
    stop.stop_on_cycle = options->stop_on_cycle != 0;
    const IndexProfile start(x0, x0 + static_cast<std::size_t>(x0_len));
    *out = new gd_trajectory{iterate(game->game, rule, start, stop, options->seed)};
  });
}

void gd_trajectory_free(gd_trajectory* trajectory) { delete trajectory; }

int gd_trajectory_length(const gd_trajectory* trajectory) {
  return trajectory == nullptr ? 0 : trajectory->trajectory.length();
}

int gd_trajectory_players(const gd_trajectory* trajectory) {
  return trajectory == nullptr ? 0 : trajectory->trajectory.players();
}

gd_status gd_trajectory_state(const gd_trajectory* trajectory, int t, double* out) {
  if (trajectory == nullptr || out == nullptr) return invalid_argument("null argument");
  if (t < 0 || t >= trajectory->trajectory.length()) {
    t_last_error = "step index out of range";
    return GD_ERR_DOMAIN;
  }
  const Profile& s = trajectory->trajectory.states[static_cast<std::size_t>(t)];
  std::memcpy(out, s.data(), s.size() * sizeof(double));
  return GD_OK;
}

gd_status gd_trajectory_write_csv(const gd_trajectory* trajectory, const char* path) {
  if (trajectory == nullptr || path == nullptr) return invalid_argument("null argument");
  return guarded([&] { write_trajectory_csv(trajectory->trajectory, path); });
}

gd_status gd_detect_cycle(const gd_trajectory* trajectory, gd_cycle_info* out) {
  if (trajectory == nullptr || out == nullptr) return invalid_argument("null argument");
  return guarded([&] {
    const CycleReport report = detect_cycle(trajectory->trajectory);
    out->kind = report.kind == CycleKind::fixed_point  ? GD_CYCLE_FIXED_POINT
                : report.kind == CycleKind::cycle      ? GD_CYCLE_CYCLE
                                                       : GD_CYCLE_UNDETERMINED;
    out->entry_index = report.entry;
    out->period = report.period;
  });
}

gd_status gd_verify_theorem2(const gd_game* game, const gd_potential* potential,
                             const gd_trajectory* trajectory, gd_report** out) {
  if (game == nullptr || potential == nullptr || trajectory == nullptr || out == nullptr)
    return invalid_argument("null argument");
  return guarded([&] {
    const Theorem2Report report =
        verify_theorem2(game->game, potential->table, trajectory->trajectory);
    *out = make_report(to_json(report));
  });
}

/* --- analysis ------------------------------------------------------------- */

gd_status gd_analyze_contraction(const gd_game* game, const char* domain_spec, double margin,
                                 gd_report** out) {
  if (game == nullptr || domain_spec == nullptr || out == nullptr)
    return invalid_argument("null argument");
  return guarded([&] {
    const std::string spec(domain_spec);
    const std::vector<Profile> samples = contraction_domain_samples(game->game, spec);
    const ContractionCertificate cert = certify(finite_br_map(game->game), samples,
                                                AnchorPolicy::centroid, margin, 0.0, 1e-10,
                                                100000, spec);
    *out = make_report(to_json(cert));
  });
}

gd_status gd_invariant_sets(const gd_game* game, const gd_potential* potential,
                            const gd_trajectory* trajectory, int t0, double eps,
                            gd_report** out) {
  if (game == nullptr || potential == nullptr || trajectory == nullptr || out == nullptr)
    return invalid_argument("null argument");
  return guarded([&] {
    Trajectory annotated = trajectory->trajectory;
    annotate_residuals(annotated, game->game, potential->table);
    const InvariantSetSpec spec =
        build_invariant_set(game->game, potential->table, annotated, t0, eps, TailMode::sup);
    const Theorem4Report t4 = theorem4_verify(game->game, potential->table, annotated, spec);
    Json payload;
    payload["invariant_set"] = to_json(spec);
    payload["theorem4"] = to_json(t4);
    *out = make_report(std::move(payload));
  });
}

/* --- cournot ---------------------------------------------------------------- */

void gd_cournot_config_init(gd_cournot_config* config) {
  if (config == nullptr) return;
  std::memset(config, 0, sizeof(*config));
  config->d = 400.0;
  config->c1 = 200.0;
  config->c2 = 100.0;
  config->a_bar = 400.0;
  config->mu_auto = 1;
  config->n_starts = 0;
  config->sequential = 0;
  config->max_steps = 200;
  config->grid_resolution = 400;
}

gd_status gd_cournot_run(const gd_cournot_config* config, const char* out_dir, gd_report** out) {
  if (config == nullptr || out == nullptr) return invalid_argument("null argument");
  if (config->n_starts < 0 || config->n_starts > 16)
    return invalid_argument("n_starts must lie in [0, 16]");
  return guarded([&] {
    CournotExperimentConfig exp;
    exp.params = CournotParams{config->d, config->c1, config->c2, config->a_bar};
    if (config->mu_auto == 0) exp.mu = std::array<double, 2>{config->mu[0], config->mu[1]};
    for (int s = 0; s < config->n_starts; ++s)
      exp.starts.push_back(
          {config->starts[static_cast<std::size_t>(2 * s)],
           config->starts[static_cast<std::size_t>(2 * s + 1)]});
    exp.mode = config->sequential != 0 ? CournotMode::sequential : CournotMode::repeated;
    exp.max_steps = config->max_steps;
    exp.delta1_grid = config->grid_resolution;

    const CournotExperimentReport report = run_experiment(exp);
    Json echo;
    echo["command"] = "cournot";
    echo["cournot"] = Json{{"d", exp.params.d},
                           {"c1", exp.params.c1},
                           {"c2", exp.params.c2},
                           {"a_bar", exp.params.a_bar},
                           {"mode", exp.mode == CournotMode::repeated ? "repeated" : "sequential"},
                           {"max_steps", exp.max_steps},
                           {"grid_resolution", exp.delta1_grid}};
    if (out_dir != nullptr) write_cournot_outputs(report, echo, out_dir);
    *out = make_report(envelope("cournot", echo, cournot_summary_json(report)));
  });
}

/* --- verify / run ------------------------------------------------------------ */

gd_status gd_verify_run(const char* suite, gd_line_callback callback, void* user, int* passed,
                        int* failed, gd_report** out) {
  if (suite == nullptr) return invalid_argument("null suite");
  return guarded([&] {
    int ok = 0, bad = 0;
    Json checks = Json::array();
    const auto results = run_verify_suite(suite, [&](const CheckResult& r) {
      if (callback != nullptr) {
        std::string line = (r.pass ? "[PASS] " : "[FAIL] ") + r.name;
        char secs[32];
        std::snprintf(secs, sizeof(secs), " (%.2fs)", r.seconds);
        line += secs;
        if (!r.detail.empty()) line += " " + r.detail;
        callback(line.c_str(), user);
      }
    });
    for (const auto& r : results) {
      (r.pass ? ok : bad) += 1;
      checks.push_back(Json{{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    if (passed != nullptr) *passed = ok;
    if (failed != nullptr) *failed = bad;
    if (out != nullptr) {
      Json payload;
      payload["suite"] = suite;
      payload["passed"] = ok;
      payload["failed"] = bad;
      payload["checks"] = std::move(checks);
      *out = make_report(std::move(payload));
    }
  });
}

gd_status gd_run_json(const char* config_json, gd_report** out) {
  if (config_json == nullptr || out == nullptr) return invalid_argument("null argument");
  return guarded([&] { *out = make_report(run_config_json(config_json)); });
}

/* --- reports ------------------------------------------------------------------ */

const char* gd_report_json(const gd_report* report) {
  return report == nullptr ? "" : report->cached.c_str();
}

gd_status gd_report_write(const gd_report* report, const char* path) {
  if (report == nullptr || path == nullptr) return invalid_argument("null argument");
  return guarded([&] { write_json_file(report->document, path); });
}

void gd_report_free(gd_report* report) { delete report; }

} /* extern "C" */
