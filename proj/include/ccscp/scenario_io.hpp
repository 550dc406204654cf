#pragma once

// Scenario JSON (schema: docs/scenario_schema.md). Physical quantities are SI:
// meters, seconds, m/s or m/s^2 for inputs, m^2 for covariances.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ccscp/bench.hpp"

namespace ccscp {

/// Throws ParseError (with line/column) on malformed JSON and ValidationError
/// naming the field path (e.g. "obstacles/0/cov") on schema or invariant
/// violations, including unknown fields.
Scenario parse_scenario(std::string_view text);

/// Reads and parses a scenario file; IoError if it cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::ordered_json scenario_to_json(const Scenario& scenario);

/// Pretty-printed JSON with a trailing newline; parse_scenario inverts it
/// exactly.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace ccscp
