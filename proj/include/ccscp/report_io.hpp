#pragma once

// Result emission: full-fidelity JSON, a per-step CSV and SVG figures.
//
// CSV columns (fixed order): k, t, x, y, u_x, u_y, constraint_residual,
// mc_probability. The last row (k = N) has empty input cells; cells are empty
// when a value does not exist (no obstacles). Every number is printed with
// the same shortest round-trip formatting as the JSON report.
//
// Timing fields ("wall_time", "total_wall_time") are the only
// nondeterministic content; strip_timing() removes them for comparisons.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ccscp/bench.hpp"

namespace ccscp {

struct EmitFlags {
  bool json = true;
  bool csv = true;
  bool svg = true;
};

/// Parses "json,csv,svg" (any subset, comma separated).
EmitFlags parse_emit_flags(std::string_view list);

nlohmann::ordered_json trajectory_to_json(const Trajectory& traj);

nlohmann::ordered_json policy_result_to_json(const PolicyResult& result,
                                             const TrajectoryProblem& problem,
                                             std::size_t samples);

nlohmann::ordered_json comparison_to_json(const ComparisonReport& report,
                                          const TrajectoryProblem& problem);

std::string policy_result_csv(const PolicyResult& result, const TrajectoryProblem& problem);

/// Recursively removes timing keys in place.
void strip_timing(nlohmann::ordered_json& j);

/// Accepts a policy report (object with "trajectory") or a bare
/// {"positions": [...], "inputs": [...]} object. Throws ParseError or
/// ValidationError.
Trajectory parse_trajectory(std::string_view text);

/// Writes <policy>.json/.csv/.svg into `out_dir` (created if missing).
/// Returns the written paths; throws IoError naming the path on failure.
std::vector<std::filesystem::path> emit_policy_result(const PolicyResult& result,
                                                      const TrajectoryProblem& problem,
                                                      std::size_t samples,
                                                      const std::filesystem::path& out_dir,
                                                      EmitFlags flags);

/// Per-policy files plus comparison.json and comparison.svg overlaying both
/// trajectories.
std::vector<std::filesystem::path> emit_comparison(const ComparisonReport& report,
                                                   const TrajectoryProblem& problem,
                                                   const std::filesystem::path& out_dir,
                                                   EmitFlags flags);

}  // namespace ccscp
