#include "gamedyn/run.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gamedyn/verify.hpp"

namespace gamedyn {

namespace {

void require_keys(const Json& obj, const std::vector<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw Error::config("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const auto& k : allowed) known = known || k == key;
    if (!known) throw Error::config("config: unknown field \"" + key + "\" in " + where);
  }
}

template <typename T>
T get_or(const Json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error::config("config: bad value for \"" + key + "\": " + e.what());
  }
}

std::string require_string(const Json& obj, const std::string& key) {
  if (!obj.contains(key) || !obj.at(key).is_string())
    throw Error::config("config: missing string field \"" + key + "\"");
  return obj.at(key).get<std::string>();
}

UpdateRule parse_rule(const Json& config) {
  UpdateRule rule;
  if (!config.contains("rule")) return rule;
  const Json& r = config.at("rule");
  require_keys(r, {"kind", "schedule", "selector"}, "rule");
  const std::string kind = get_or<std::string>(r, "kind", "sequential_best");
  if (kind == "sequential_best")
    rule.kind = RuleKind::sequential_best;
  else if (kind == "sequential_better")
    rule.kind = RuleKind::sequential_better;
  else if (kind == "simultaneous_best")
    rule.kind = RuleKind::simultaneous_best;
  else
    throw Error::config("config: unknown rule kind \"" + kind + "\"");
  const std::string schedule = get_or<std::string>(r, "schedule", "round_robin");
  if (schedule == "round_robin")
    rule.schedule = Schedule::round_robin_eligible;
  else if (schedule == "random")
    rule.schedule = Schedule::seeded_random_eligible;
  else
    throw Error::config("config: unknown schedule \"" + schedule + "\"");
  const std::string selector = get_or<std::string>(r, "selector", "first_improving");
  if (selector == "first_improving")
    rule.selector = BetterSelector::first_improving;
  else if (selector == "max_improving")
    rule.selector = BetterSelector::max_improving;
  else
    throw Error::config("config: unknown selector \"" + selector + "\"");
  return rule;
}

IndexProfile parse_x0(const Json& config, const FiniteGame& game) {
  if (!config.contains("x0")) return IndexProfile(static_cast<std::size_t>(game.players()), 0);
  const Json& x = config.at("x0");
  if (!x.is_array() || static_cast<int>(x.size()) != game.players())
    throw Error::config("config: x0 must list one coordinate per player");
  Profile coords;
  for (const auto& v : x) {
    if (!v.is_number()) throw Error::config("config: x0 entries must be numbers");
    coords.push_back(v.get<double>());
  }
  const auto idx = game.exact_indices(coords, 1e-9);
  if (!idx.has_value())
    throw Error::domain("config: x0 does not match the game's action values");
  return *idx;
}

StopSpec parse_stop(const Json& config) {
  StopSpec stop;
  stop.max_steps = get_or<int>(config, "steps", 200);
  if (config.contains("tolerances")) {
    const Json& t = config.at("tolerances");
    require_keys(t, {"fixed_point_tol", "fixed_point_window"}, "tolerances");
    stop.fixed_point_tol = get_or<double>(t, "fixed_point_tol", stop.fixed_point_tol);
    stop.fixed_point_window = get_or<int>(t, "fixed_point_window", stop.fixed_point_window);
  }
  return stop;
}

Json run_simulate(const Json& config) {
  const std::string game_path = require_string(config, "game");
  const FiniteGame game = load_finite_game(game_path);
  const UpdateRule rule = parse_rule(config);
  const IndexProfile x0 = parse_x0(config, game);
  const StopSpec stop = parse_stop(config);
  const std::uint64_t seed = get_or<std::uint64_t>(config, "seed", 0);

  Trajectory traj = iterate(game, rule, x0, stop, seed);

  std::vector<double> phi;
  if (config.contains("phi")) {
    phi = load_potential_table(require_string(config, "phi"), game);
    annotate_residuals(traj, game, phi);
  }
  const CycleReport cycle = detect_cycle(traj);

  Json payload;
  payload["trajectory_length"] = traj.length();
  payload["final_state"] = Json(traj.states.back());
  payload["cycle"] = to_json(cycle);
  if (!phi.empty()) {
    const Theorem2Report t2 = verify_theorem2(game, phi, traj);
    payload["theorem2"] = to_json(t2);
  }

  const std::string out = get_or<std::string>(config, "out", "");
  if (!out.empty()) {
    write_trajectory_csv(traj, out + "/trajectory.csv");
    write_json_file(envelope("simulate", config, to_json(cycle)), out + "/cycle_report.json");
    if (payload.contains("theorem2"))
      write_json_file(envelope("simulate", config, payload["theorem2"]),
                      out + "/theorem2_report.json");
  }
  return payload;
}

Json run_analyze_contraction(const Json& config) {
  const std::string game_path = require_string(config, "game");
  const FiniteGame game = load_finite_game(game_path);

  std::string domain = "all";
  double margin = 0.1;
  AnchorPolicy anchor = AnchorPolicy::centroid;
  if (config.contains("contraction")) {
    const Json& c = config.at("contraction");
    require_keys(c, {"domain", "margin", "anchor"}, "contraction");
    domain = get_or<std::string>(c, "domain", domain);
    margin = get_or<double>(c, "margin", margin);
    const std::string a = get_or<std::string>(c, "anchor", "centroid");
    if (a == "centroid")
      anchor = AnchorPolicy::centroid;
    else if (a == "fixed_point_guess")
      anchor = AnchorPolicy::fixed_point_guess;
    else
      throw Error::config("config: unknown anchor policy \"" + a + "\"");
  }

  const std::vector<Profile> samples = contraction_domain_samples(game, domain);
  const ContractionCertificate cert =
      certify(finite_br_map(game), samples, anchor, margin, 0.0, 1e-10, 100000, domain);
  const Json payload = to_json(cert);

  const std::string out = get_or<std::string>(config, "out", "");
  if (!out.empty())
    write_json_file(envelope("analyze-contraction", config, payload), out + "/certificate.json");
  return payload;
}

Json run_invariant_sets(const Json& config) {
  const std::string game_path = require_string(config, "game");
  const FiniteGame game = load_finite_game(game_path);
  const std::vector<double> phi = load_potential_table(require_string(config, "phi"), game);

  int t0 = 0;
  double eps = 1.0;
  int grid = 200;
  TailMode mode = TailMode::sup;
  double window = 0.5;
  if (config.contains("invariant")) {
    const Json& i = config.at("invariant");
    require_keys(i, {"t0", "eps", "grid", "mode", "window_fraction"}, "invariant");
    t0 = get_or<int>(i, "t0", t0);
    eps = get_or<double>(i, "eps", eps);
    grid = get_or<int>(i, "grid", grid);
    window = get_or<double>(i, "window_fraction", window);
    const std::string m = get_or<std::string>(i, "mode", "sup");
    if (m == "sup")
      mode = TailMode::sup;
    else if (m == "limsup")
      mode = TailMode::limsup_windowed;
    else
      throw Error::config("config: unknown invariant mode \"" + m + "\"");
  }

  UpdateRule rule;
  rule.kind = RuleKind::simultaneous_best;  // the repeated-game theorem
  const IndexProfile x0 = parse_x0(config, game);
  const StopSpec stop = parse_stop(config);
  Trajectory traj = iterate(game, rule, x0, stop, get_or<std::uint64_t>(config, "seed", 0));
  annotate_residuals(traj, game, phi);

  // table games enumerate the action space exactly; grid is echoed only
  const InvariantSetSpec spec = build_invariant_set(game, phi, traj, t0, eps, mode, window);
  const Theorem4Report t4 = theorem4_verify(game, phi, traj, spec);

  Json payload;
  payload["invariant_set"] = to_json(spec);
  payload["requested_grid"] = grid;
  payload["theorem4"] = to_json(t4);

  const std::string out = get_or<std::string>(config, "out", "");
  if (!out.empty()) {
    write_trajectory_csv(traj, out + "/trajectory.csv");
    write_json_file(envelope("invariant-sets", config, payload["invariant_set"]),
                    out + "/invariant_spec.json");
    write_json_file(envelope("invariant-sets", config, payload["theorem4"]),
                    out + "/theorem4_report.json");
  }
  return payload;
}

Json run_cournot(const Json& config) {
  CournotExperimentConfig exp;
  if (config.contains("cournot")) {
    const Json& c = config.at("cournot");
    require_keys(c,
                 {"d", "c1", "c2", "a_bar", "mu", "starts", "mode", "max_steps",
                  "grid_resolution", "tail_from"},
                 "cournot");
    exp.params.d = get_or<double>(c, "d", exp.params.d);
    exp.params.c1 = get_or<double>(c, "c1", exp.params.c1);
    exp.params.c2 = get_or<double>(c, "c2", exp.params.c2);
    exp.params.a_bar = get_or<double>(c, "a_bar", exp.params.a_bar);
    exp.max_steps = get_or<int>(c, "max_steps", exp.max_steps);
    exp.delta1_grid = get_or<int>(c, "grid_resolution", exp.delta1_grid);
    exp.tail_from = get_or<int>(c, "tail_from", exp.tail_from);
    if (c.contains("mu") && !(c.at("mu").is_string() && c.at("mu") == "auto")) {
      const Json& mu = c.at("mu");
      if (!mu.is_array() || mu.size() != 2)
        throw Error::config("config: mu must be \"auto\" or [x, y]");
      exp.mu = std::array<double, 2>{mu[0].get<double>(), mu[1].get<double>()};
    }
    if (c.contains("starts") && !(c.at("starts").is_string() && c.at("starts") == "default_grid")) {
      const Json& starts = c.at("starts");
      if (!starts.is_array() || starts.empty())
        throw Error::config("config: starts must be \"default_grid\" or a list of [x, y]");
      for (const auto& s : starts) {
        if (!s.is_array() || s.size() != 2)
          throw Error::config("config: each start must be [x, y]");
        exp.starts.push_back({s[0].get<double>(), s[1].get<double>()});
      }
    }
    const std::string mode = get_or<std::string>(c, "mode", "repeated");
    if (mode == "repeated")
      exp.mode = CournotMode::repeated;
    else if (mode == "sequential")
      exp.mode = CournotMode::sequential;
    else
      throw Error::config("config: unknown cournot mode \"" + mode + "\"");
  }

  const CournotExperimentReport report = run_experiment(exp);
  const Json payload = cournot_summary_json(report);
  const std::string out = get_or<std::string>(config, "out", "");
  if (!out.empty())
    write_cournot_outputs(report, config, out, get_or<bool>(config, "stamp", false));
  return payload;
}

Json run_verify(const Json& config, const std::function<void(const std::string&)>& line_sink) {
  const std::string suite = get_or<std::string>(config, "suite", "all");
  const auto on_result = [&](const CheckResult& r) {
    if (!line_sink) return;
    std::ostringstream line;
    line << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
    char secs[32];
    std::snprintf(secs, sizeof(secs), " (%.2fs)", r.seconds);
    line << secs;
    if (!r.detail.empty()) line << " " << r.detail;
    line_sink(line.str());
  };
  const std::vector<CheckResult> results = run_verify_suite(suite, on_result);

  int passed = 0, failed = 0;
  Json checks = Json::array();
  for (const auto& r : results) {
    (r.pass ? passed : failed) += 1;
    checks.push_back(Json{{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  Json payload;
  payload["suite"] = suite;
  payload["passed"] = passed;
  payload["failed"] = failed;
  payload["checks"] = std::move(checks);
  if (line_sink)
    line_sink(std::to_string(passed) + " passed, " + std::to_string(failed) + " failed");

  const std::string out = get_or<std::string>(config, "out", "");
  if (!out.empty())
    write_json_file(envelope("verify", config, payload), out + "/verify_report.json");
  return payload;
}

}  // namespace

Json run_config(const Json& config, const std::function<void(const std::string&)>& line_sink) {
  require_keys(config,
               {"command", "seed", "out", "stamp", "game", "phi", "rule", "x0", "steps",
                "tolerances", "contraction", "invariant", "cournot", "suite"},
               "the config");
  const std::string command = require_string(config, "command");

  Json payload;
  if (command == "simulate")
    payload = run_simulate(config);
  else if (command == "analyze-contraction")
    payload = run_analyze_contraction(config);
  else if (command == "invariant-sets")
    payload = run_invariant_sets(config);
  else if (command == "cournot")
    payload = run_cournot(config);
  else if (command == "verify")
    payload = run_verify(config, line_sink);
  else
    throw Error::config("config: unknown command \"" + command + "\"");

  const Json report = envelope(command, config, std::move(payload),
                               get_or<bool>(config, "stamp", false));
  const std::string out = get_or<std::string>(config, "out", "");
  if (!out.empty() && command != "cournot") write_json_file(report, out + "/report.json");
  return report;
}

Json run_config_json(const std::string& config_text,
                     const std::function<void(const std::string&)>& line_sink) {
  Json config;
  try {
    config = Json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error::config(std::string("config: ") + e.what());
  }
  return run_config(config, line_sink);
}

}  // namespace gamedyn
