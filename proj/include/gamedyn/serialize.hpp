#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamedyn/contraction.hpp"
#include "gamedyn/cournot.hpp"
#include "gamedyn/dynamics.hpp"
#include "gamedyn/game.hpp"
#include "gamedyn/invariants.hpp"

namespace gamedyn {

using Json = nlohmann::ordered_json;

// --- game files ----------------------------------------------------------
// Schema (strict, unknown fields rejected):
//   { "players": N, "action_sets": [[..], ...], "utilities": [nested, ...] }
// utilities[i] is nested row-major with player 0 outermost. A potential
// candidate uses the same schema with "potential" in place of "utilities".

FiniteGame load_finite_game(const std::string& path);
FiniteGame parse_finite_game(const std::string& text, const std::string& origin = "<string>");

std::vector<double> load_potential_table(const std::string& path, const FiniteGame& shape);
std::vector<double> parse_potential_table(const std::string& text, const FiniteGame& shape,
                                          const std::string& origin = "<string>");

// --- trajectory CSV ------------------------------------------------------
// Header: t,player_1,...,player_N,w_t,k_t,mover. One row per state; the row
// for state t carries the diagnostics of the step t -> t+1 (the final row
// has w_t = k_t = 0 and mover "-"). Doubles at 17 significant digits.

std::string trajectory_to_csv(const Trajectory& trajectory);
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

// --- report payloads -----------------------------------------------------

Json to_json(const CycleReport& report);
Json to_json(const Theorem2Report& report);
Json to_json(const ContractionCertificate& cert);
Json to_json(const TheoremOneBounds& bounds);
Json to_json(const TrapReport& report);
Json to_json(const InvariantSetSpec& spec);
Json to_json(const Theorem4Report& report);
Json cournot_summary_json(const CournotExperimentReport& report);

/// {artifact_version, command, config, timestamp, payload}; the timestamp is
/// null unless stamping is enabled so identical runs emit identical bytes.
Json envelope(const std::string& command, const Json& config_echo, Json payload,
              bool stamp = false);

void write_json_file(const Json& document, const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Per-trajectory point-list files plus a 256-segment circle polyline, one
/// set for the full view and one for the tail view (states from `tail_from`).
/// Files: <prefix>_<view>_<index>.txt and circle_<view>.txt under out_dir.
void emit_plot_data(const std::vector<const Trajectory*>& trajectories, const Profile& center,
                    double radius, int tail_from, const std::string& out_dir,
                    const std::string& prefix);

/// Everything the cournot command produces under out_dir: per-trajectory
/// CSVs, plot data for both views, and summary.json.
void write_cournot_outputs(const CournotExperimentReport& report, const Json& config_echo,
                           const std::string& out_dir, bool stamp = false);

std::string format_double(double v);  // %.17g
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace gamedyn
