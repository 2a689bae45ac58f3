#pragma once

#include <functional>
#include <string>

#include "gamedyn/serialize.hpp"

namespace gamedyn {

/// Parse (strictly: unknown fields anywhere are rejected) and execute one
/// run configuration. Output files land under the config's "out" directory;
/// the returned envelope is also written there as report.json when "out" is
/// set. See the README for the schema.
Json run_config_json(const std::string& config_text,
                     const std::function<void(const std::string&)>& line_sink = {});

Json run_config(const Json& config, const std::function<void(const std::string&)>& line_sink = {});

}  // namespace gamedyn
