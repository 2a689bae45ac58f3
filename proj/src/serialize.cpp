#include "gamedyn/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gamedyn {

namespace {

using nlohmann::json;

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

Json parse_document(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error::parse(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                       ": " + e.what());
  }
}

void require_keys(const Json& obj, const std::vector<std::string>& allowed,
                  const std::string& origin, const std::string& where) {
  if (!obj.is_object()) throw Error::parse(origin + ": " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const auto& k : allowed) known = known || k == key;
    if (!known) throw Error::parse(origin + ": unknown field \"" + key + "\" in " + where);
  }
}

void flatten_table(const Json& node, const std::vector<int>& counts, std::size_t axis,
                   std::vector<double>& out, const std::string& origin,
                   const std::string& where) {
  if (axis == counts.size()) {
    if (!node.is_number())
      throw Error::parse(origin + ": expected a number at depth " + std::to_string(axis) +
                         " in " + where);
    out.push_back(node.get<double>());
    return;
  }
  if (!node.is_array() || static_cast<int>(node.size()) != counts[axis])
    throw Error::shape(origin + ": " + where + " must have " + std::to_string(counts[axis]) +
                       " entries at depth " + std::to_string(axis));
  for (const auto& child : node) flatten_table(child, counts, axis + 1, out, origin, where);
}

struct ParsedGameFile {
  std::vector<std::vector<double>> action_sets;
  std::vector<std::vector<double>> utilities;  // or the single potential table
  bool is_potential = false;
};

ParsedGameFile parse_game_document(const std::string& text, const std::string& origin) {
  const Json doc = parse_document(text, origin);
  require_keys(doc, {"players", "action_sets", "utilities", "potential"}, origin, "the document");
  if (!doc.contains("players") || !doc["players"].is_number_integer())
    throw Error::parse(origin + ": missing integer field \"players\"");
  const int players = doc["players"].get<int>();
  if (players < 1) throw Error::shape(origin + ": players must be at least 1");
  if (!doc.contains("action_sets") || !doc["action_sets"].is_array() ||
      static_cast<int>(doc["action_sets"].size()) != players)
    throw Error::shape(origin + ": \"action_sets\" must list one array per player");

  ParsedGameFile out;
  std::vector<int> counts;
  for (const auto& s : doc["action_sets"]) {
    if (!s.is_array() || s.empty())
      throw Error::shape(origin + ": each action set must be a nonempty array");
    std::vector<double> set;
    for (const auto& v : s) {
      if (!v.is_number()) throw Error::parse(origin + ": action values must be numbers");
      set.push_back(v.get<double>());
    }
    counts.push_back(static_cast<int>(set.size()));
    out.action_sets.push_back(std::move(set));
  }

  const bool has_utilities = doc.contains("utilities");
  const bool has_potential = doc.contains("potential");
  if (has_utilities == has_potential)
    throw Error::parse(origin + ": exactly one of \"utilities\" or \"potential\" is required");

  if (has_utilities) {
    if (!doc["utilities"].is_array() || static_cast<int>(doc["utilities"].size()) != players)
      throw Error::shape(origin + ": \"utilities\" must list one table per player");
    for (int i = 0; i < players; ++i) {
      std::vector<double> flat;
      flatten_table(doc["utilities"][static_cast<std::size_t>(i)], counts, 0, flat, origin,
                    "utilities[" + std::to_string(i) + "]");
      out.utilities.push_back(std::move(flat));
    }
  } else {
    out.is_potential = true;
    std::vector<double> flat;
    flatten_table(doc["potential"], counts, 0, flat, origin, "potential");
    out.utilities.push_back(std::move(flat));
  }
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::io("cannot write file: " + path);
  out << content;
  if (!out) throw Error::io("write failed: " + path);
}

FiniteGame parse_finite_game(const std::string& text, const std::string& origin) {
  ParsedGameFile parsed = parse_game_document(text, origin);
  if (parsed.is_potential)
    throw Error::parse(origin + ": expected a game file with \"utilities\"");
  return FiniteGame(std::move(parsed.action_sets), std::move(parsed.utilities));
}

FiniteGame load_finite_game(const std::string& path) {
  return parse_finite_game(read_text_file(path), path);
}

std::vector<double> parse_potential_table(const std::string& text, const FiniteGame& shape,
                                          const std::string& origin) {
  ParsedGameFile parsed = parse_game_document(text, origin);
  if (!parsed.is_potential)
    throw Error::parse(origin + ": expected a potential file with \"potential\"");
  if (static_cast<int>(parsed.action_sets.size()) != shape.players())
    throw Error::shape(origin + ": action sets do not match the game");
  for (int i = 0; i < shape.players(); ++i)
    if (parsed.action_sets[static_cast<std::size_t>(i)] != shape.action_set(i))
      throw Error::shape(origin + ": action sets do not match the game");
  return std::move(parsed.utilities.front());
}

std::vector<double> load_potential_table(const std::string& path, const FiniteGame& shape) {
  return parse_potential_table(read_text_file(path), shape, path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= trajectory.players(); ++i) out << ",player_" << i;
  out << ",w_t,k_t,mover\n";
  for (int t = 0; t < trajectory.length(); ++t) {
    out << t;
    for (double v : trajectory.states[static_cast<std::size_t>(t)])
      out << "," << format_double(v);
    if (t < static_cast<int>(trajectory.steps.size())) {
      const StepInfo& s = trajectory.steps[static_cast<std::size_t>(t)];
      out << "," << format_double(s.w) << "," << format_double(s.k) << ",";
      if (s.mover == kMoverAll)
        out << "all";
      else if (s.mover == kMoverNone)
        out << "-";
      else
        out << (s.mover + 1);
    } else {
      out << ",0,0,-";
    }
    out << "\n";
  }
  return out.str();
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
  write_text_file(path, trajectory_to_csv(trajectory));
}

Trajectory read_trajectory_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error::parse(path + ":1: empty trajectory file");
  int columns = 1;
  for (char c : line) columns += c == ',';
  const int players = columns - 4;
  if (players < 1) throw Error::parse(path + ":1: malformed trajectory header");

  Trajectory traj;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != columns)
      throw Error::parse(path + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(columns) + " columns");
    Profile state(static_cast<std::size_t>(players));
    for (int i = 0; i < players; ++i)
      state[static_cast<std::size_t>(i)] = std::stod(cells[static_cast<std::size_t>(i) + 1]);
    traj.states.push_back(std::move(state));
    StepInfo info;
    info.w = std::stod(cells[static_cast<std::size_t>(players) + 1]);
    info.k = std::stod(cells[static_cast<std::size_t>(players) + 2]);
    const std::string& mover = cells[static_cast<std::size_t>(players) + 3];
    if (mover == "all")
      info.mover = kMoverAll;
    else if (mover == "-")
      info.mover = kMoverNone;
    else
      info.mover = std::stoi(mover) - 1;
    traj.steps.push_back(info);
  }
  if (!traj.steps.empty()) traj.steps.pop_back();  // final row carries no step
  return traj;
}

// --- payloads --------------------------------------------------------------

namespace {

Json profile_json(const Profile& p) {
  Json out = Json::array();
  for (double v : p) out.push_back(v);
  return out;
}

Json index_profile_json(const IndexProfile& p) {
  Json out = Json::array();
  for (int v : p) out.push_back(v);
  return out;
}

}  // namespace

Json to_json(const CycleReport& report) {
  Json out;
  switch (report.kind) {
    case CycleKind::fixed_point: out["kind"] = "fixed_point"; break;
    case CycleKind::cycle: out["kind"] = "cycle"; break;
    case CycleKind::undetermined: out["kind"] = "undetermined"; break;
  }
  out["entry_index"] = report.entry;
  out["period"] = report.period;
  Json states = Json::array();
  for (const auto& s : report.cycle_states) states.push_back(index_profile_json(s));
  out["cycle_states"] = std::move(states);
  return out;
}

Json to_json(const Theorem2Report& report) {
  Json out;
  out["resolved"] = report.resolved;
  out["holds"] = report.holds;
  out["delta"] = report.delta;
  out["period"] = report.period;
  out["entry_index"] = report.entry;
  out["eps_cycle"] = report.eps_cycle;
  out["eps_bound"] = report.eps_bound;
  out["fixed_point_is_ne"] = report.fixed_point_is_ne;
  out["alpha_inequality_ok"] = report.alpha_inequality_ok;
  out["alphas"] = report.alphas;
  Json witnesses = Json::array();
  for (const auto& w : report.witnesses) {
    Json jw;
    jw["state"] = index_profile_json(w.state);
    jw["max_gain"] = w.max_gain;
    jw["in_cycle_eps"] = w.in_cycle_eps;
    jw["in_bound_eps"] = w.in_bound_eps;
    witnesses.push_back(std::move(jw));
  }
  out["witnesses"] = std::move(witnesses);
  return out;
}

Json to_json(const TheoremOneBounds& bounds) {
  Json out;
  out["delta1"] = bounds.delta1;
  out["delta2"] = bounds.delta2;
  out["L_C"] = bounds.L_C;
  out["radii"] = Json{{"r_Z", bounds.r_Z}, {"r_K", bounds.r_K}, {"r_tilde", bounds.r_tilde}};
  if (bounds.part2.has_value()) {
    Json p2;
    p2["m"] = bounds.part2->m;
    p2["L_K"] = bounds.part2->L_K;
    p2["L_Kr"] = bounds.part2->L_Kr;
    p2["R_r"] = bounds.part2->R_r;
    p2["max_R_r"] = bounds.part2->max_R_r;
    out["part2"] = std::move(p2);
  } else {
    out["part2"] = nullptr;
  }
  return out;
}

Json to_json(const ContractionCertificate& cert) {
  Json out;
  out["L_C"] = cert.L_C;
  out["delta1"] = cert.delta1;
  out["delta2"] = cert.delta2;
  out["alpha"] = cert.alpha;
  out["anchor"] = profile_json(cert.anchor);
  out["x_star"] = profile_json(cert.x_star);
  out["fixed_point_residual"] = cert.fixed_point_residual;
  out["domain_spec"] = cert.domain_spec;
  out["sample_count"] = cert.sample_count;
  const TheoremOneBounds bounds = cert.bounds();
  out["radii"] = Json{{"r_Z", bounds.r_Z}, {"r_K", bounds.r_K}, {"r_tilde", bounds.r_tilde}};
  out["part2"] = nullptr;
  return out;
}

Json to_json(const TrapReport& report) {
  Json out;
  if (report.all_inside_after.has_value())
    out["all_inside_after"] = *report.all_inside_after;
  else
    out["all_inside_after"] = nullptr;
  out["max_tail_distance"] = report.max_tail_distance;
  return out;
}

Json to_json(const InvariantSetSpec& spec) {
  Json out;
  out["players"] = spec.players;
  out["delta"] = spec.delta;
  out["sup_k"] = spec.sup_k;
  out["sup_w"] = spec.sup_w;
  out["L0"] = spec.L0;
  out["L0_provenance"] = spec.l0_provenance == Provenance::analytic ? "analytic" : "sampled";
  out["epsilon"] = spec.epsilon;
  out["R4"] = spec.R4;
  out["R5"] = spec.R5;
  out["mode"] = spec.mode == TailMode::sup ? "sup" : "limsup_windowed";
  out["T0"] = spec.T0;
  out["phi_threshold"] = spec.phi_threshold;
  out["threshold_witness"] = profile_json(spec.threshold_witness);
  out["grid_per_axis"] = spec.grid_per_axis;
  out["window_fraction"] = spec.window_fraction;
  return out;
}

Json to_json(const Theorem4Report& report) {
  Json out;
  if (report.entry_index.has_value())
    out["entry_index"] = *report.entry_index;
  else
    out["entry_index"] = nullptr;
  out["post_entry_violations"] = report.post_entry_violations;
  if (report.first_r4_visit.has_value())
    out["first_r4_visit"] = *report.first_r4_visit;
  else
    out["first_r4_visit"] = nullptr;
  return out;
}

Json cournot_summary_json(const CournotExperimentReport& report) {
  Json out;
  out["d"] = report.params.d;
  out["c1"] = report.params.c1;
  out["c2"] = report.params.c2;
  out["a_bar"] = report.params.a_bar;
  out["mu"] = Json::array({report.mu[0], report.mu[1]});
  out["mode"] = report.mode == CournotMode::repeated ? "repeated" : "sequential";
  out["x_tilde"] = profile_json(report.x_tilde);
  out["delta1"] = report.delta1;
  out["radius"] = report.radius;
  out["tail_from"] = report.tail_from;
  Json starts = Json::array();
  for (const auto& s : report.starts) starts.push_back(profile_json(s));
  out["starts"] = std::move(starts);
  Json nominal = Json::array(), perturbed = Json::array();
  for (std::size_t s = 0; s < report.starts.size(); ++s) {
    Json n = to_json(report.nominal_trap[s]);
    n["steps"] = report.nominal[s].length() - 1;
    n["final_state"] = profile_json(report.nominal[s].states.back());
    nominal.push_back(std::move(n));
    Json p = to_json(report.perturbed_trap[s]);
    p["steps"] = report.perturbed[s].length() - 1;
    p["final_state"] = profile_json(report.perturbed[s].states.back());
    int clamped = 0;
    for (const auto& step : report.perturbed[s].steps) clamped += step.clamped;
    p["clamped_steps"] = clamped;
    perturbed.push_back(std::move(p));
  }
  out["nominal"] = std::move(nominal);
  out["perturbed"] = std::move(perturbed);
  return out;
}

Json envelope(const std::string& command, const Json& config_echo, Json payload, bool stamp) {
  Json out;
  out["artifact_version"] = "1.0.0";
  out["command"] = command;
  out["config"] = config_echo;
  if (stamp)
    out["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
  else
    out["timestamp"] = nullptr;
  out["payload"] = std::move(payload);
  return out;
}

void write_json_file(const Json& document, const std::string& path) {
  write_text_file(path, document.dump(2) + "\n");
}

void emit_plot_data(const std::vector<const Trajectory*>& trajectories, const Profile& center,
                    double radius, int tail_from, const std::string& out_dir,
                    const std::string& prefix) {
  if (trajectories.empty()) throw Error::domain("emit_plot_data: need at least one trajectory");
  const auto write_view = [&](const std::string& view, int from) {
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      std::ostringstream points;
      const Trajectory& traj = *trajectories[k];
      for (int t = from; t < traj.length(); ++t) {
        const Profile& s = traj.states[static_cast<std::size_t>(t)];
        points << format_double(s[0]);
        for (std::size_t i = 1; i < s.size(); ++i) points << " " << format_double(s[i]);
        points << "\n";
      }
      write_text_file(out_dir + "/" + prefix + "_" + view + "_" + std::to_string(k) + ".txt",
                      points.str());
    }
    std::ostringstream circle;
    constexpr int kSegments = 256;
    for (int i = 0; i <= kSegments; ++i) {
      const double theta = 2.0 * 3.14159265358979323846 * i / kSegments;
      circle << format_double(center[0] + radius * std::cos(theta)) << " "
             << format_double(center[1] + radius * std::sin(theta)) << "\n";
    }
    write_text_file(out_dir + "/circle_" + view + ".txt", circle.str());
  };
  write_view("full", 0);
  write_view("tail", tail_from);
}

void write_cournot_outputs(const CournotExperimentReport& report, const Json& config_echo,
                           const std::string& out_dir, bool stamp) {
  const std::string mode = report.mode == CournotMode::repeated ? "repeated" : "sequential";
  std::vector<const Trajectory*> nominal, perturbed;
  for (std::size_t s = 0; s < report.starts.size(); ++s) {
    write_trajectory_csv(report.nominal[s],
                         out_dir + "/nominal_" + mode + "_" + std::to_string(s) + ".csv");
    write_trajectory_csv(report.perturbed[s],
                         out_dir + "/perturbed_" + mode + "_" + std::to_string(s) + ".csv");
    nominal.push_back(&report.nominal[s]);
    perturbed.push_back(&report.perturbed[s]);
  }
  emit_plot_data(nominal, report.x_tilde, report.radius, report.tail_from, out_dir + "/plot",
                 "nominal_" + mode);
  emit_plot_data(perturbed, report.x_tilde, report.radius, report.tail_from, out_dir + "/plot",
                 "perturbed_" + mode);
  write_json_file(envelope("cournot", config_echo, cournot_summary_json(report), stamp),
                  out_dir + "/summary.json");
}

std::uint64_t fnv1a_file(const std::string& path) {
  const std::string bytes = read_text_file(path);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace gamedyn
