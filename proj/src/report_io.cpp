#include "ccscp/report_io.hpp"

#include <fstream>
#include <system_error>

#include "ccscp/errors.hpp"
#include "ccscp/svg.hpp"

namespace ccscp {
namespace {

using nlohmann::ordered_json;

constexpr const char* kFixedColor = "#1f77b4";
constexpr const char* kIterativeColor = "#9467bd";

ordered_json number_or_null(const std::vector<double>& v, std::size_t i) {
  if (i < v.size() && std::isfinite(v[i])) return v[i];
  return nullptr;
}

std::string cell(const ordered_json& j) { return j.is_null() ? std::string() : j.dump(); }

ordered_json step_rows(const PolicyResult& r, const TrajectoryProblem& problem) {
  ordered_json rows = ordered_json::array();
  const Trajectory& t = r.report.trajectory;
  for (std::size_t k = 0; k < t.positions.size(); ++k) {
    ordered_json row;
    row["k"] = k;
    row["t"] = static_cast<double>(k) * problem.dt;
    row["x"] = t.positions[k].x;
    row["y"] = t.positions[k].y;
    row["u_x"] = k < t.inputs.size() ? ordered_json(t.inputs[k].x) : ordered_json(nullptr);
    row["u_y"] = k < t.inputs.size() ? ordered_json(t.inputs[k].y) : ordered_json(nullptr);
    row["constraint_residual"] = number_or_null(r.constraint_value, k);
    row["mc_probability"] = number_or_null(r.mc_probability, k);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
  }
}

std::string series_label(const PolicyResult& r) {
  return std::string(policy_name(r.policy)) + " (" +
         (r.error.empty() ? std::string(solve_status_name(r.report.status)) : "error") + ", " +
         (r.failed ? "failure" : "success") + ")";
}

}  // namespace

EmitFlags parse_emit_flags(std::string_view list) {
  EmitFlags f{false, false, false};
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t end = std::min(list.find(',', pos), list.size());
    const std::string_view item = list.substr(pos, end - pos);
    if (item == "json") f.json = true;
    else if (item == "csv") f.csv = true;
    else if (item == "svg") f.svg = true;
    else if (!item.empty()) throw ValidationError("emit", "unknown format \"" + std::string(item) + "\"");
    pos = end + 1;
  }
  return f;
}

ordered_json trajectory_to_json(const Trajectory& traj) {
  ordered_json positions = ordered_json::array();
  for (const Vec2& p : traj.positions) positions.push_back({p.x, p.y});
  ordered_json inputs = ordered_json::array();
  for (const Vec2& u : traj.inputs) inputs.push_back({u.x, u.y});
  ordered_json j;
  j["positions"] = std::move(positions);
  j["inputs"] = std::move(inputs);
  return j;
}

ordered_json policy_result_to_json(const PolicyResult& r, const TrajectoryProblem& problem,
                                   std::size_t samples) {
  ordered_json j;
  const SolveReport& rep = r.report;
  j["policy"] = std::string(policy_name(r.policy));
  j["classification"] = r.failed ? "failure" : "success";
  if (!r.error.empty()) {
    j["error"] = r.error;
    return j;
  }
  j["status"] = std::string(solve_status_name(rep.status));
  j["iterations"] = rep.iterations;
  j["qp_iterations"] = rep.qp_iterations;
  j["objective"] = rep.objective;
  j["slack_used"] = rep.slack_used;
  j["max_constraint_violation"] = rep.max_constraint_violation;
  j["goal_error"] = rep.goal_error;
  j["last_step_norm"] = rep.last_step_norm;
  j["final_trust_radius"] = rep.final_trust_radius;
  j["fallback_used"] = rep.fallback_used;
  j["wall_time"] = rep.wall_time;
  j["delta"] = problem.delta.value();
  j["mc_samples"] = samples;
  j["mc_bound"] = monte_carlo_bound(problem.delta.value(), samples);
  j["steps"] = step_rows(r, problem);
  j["trajectory"] = trajectory_to_json(rep.trajectory);
  ordered_json history = ordered_json::array();
  for (const Trajectory& t : rep.iterate_history) history.push_back(trajectory_to_json(t));
  j["iterate_history"] = std::move(history);
  j["merit_history"] = rep.merit_history;
  return j;
}

ordered_json comparison_to_json(const ComparisonReport& report, const TrajectoryProblem& problem) {
  ordered_json j;
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["delta"] = report.delta;
  j["mc_samples"] = report.samples;
  j["mc_bound"] = report.mc_bound;
  ordered_json policies = ordered_json::array();
  ordered_json timing;
  for (const PolicyResult& r : report.results) {
    policies.push_back(policy_result_to_json(r, problem, report.samples));
    timing[std::string(policy_name(r.policy)) + "_wall_time"] = r.report.wall_time;
  }
  j["policies"] = std::move(policies);
  timing["total_wall_time"] = report.total_wall_time;
  j["timing"] = std::move(timing);
  return j;
}

std::string policy_result_csv(const PolicyResult& r, const TrajectoryProblem& problem) {
  std::string out = "k,t,x,y,u_x,u_y,constraint_residual,mc_probability\n";
  if (!r.error.empty()) return out;
  for (const ordered_json& row : step_rows(r, problem)) {
    out += cell(row["k"]) + "," + cell(row["t"]) + "," + cell(row["x"]) + "," + cell(row["y"]) +
           "," + cell(row["u_x"]) + "," + cell(row["u_y"]) + "," +
           cell(row["constraint_residual"]) + "," + cell(row["mc_probability"]) + "\n";
  }
  return out;
}

void strip_timing(ordered_json& j) {
  if (j.is_object()) {
    j.erase("wall_time");
    j.erase("total_wall_time");
    j.erase("timing");
    for (auto& item : j.items()) strip_timing(item.value());
  } else if (j.is_array()) {
    for (auto& item : j) strip_timing(item);
  }
}

Trajectory parse_trajectory(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, e.byte, e.what());
  }
  const nlohmann::json* t = &j;
  if (j.is_object() && j.contains("trajectory")) t = &j["trajectory"];
  if (!t->is_object() || !t->contains("positions") || !t->contains("inputs")) {
    throw ValidationError("trajectory", "expected an object with positions and inputs");
  }
  auto read = [](const nlohmann::json& arr, const std::string& field) {
    if (!arr.is_array()) throw ValidationError(field, "must be an array");
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& v = arr[i];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ValidationError(field + "/" + std::to_string(i), "must be [x, y]");
      }
      out.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return out;
  };
  Trajectory traj;
  traj.positions = read((*t)["positions"], "trajectory/positions");
  traj.inputs = read((*t)["inputs"], "trajectory/inputs");
  return traj;
}

std::vector<std::filesystem::path> emit_policy_result(const PolicyResult& r,
                                                      const TrajectoryProblem& problem,
                                                      std::size_t samples,
                                                      const std::filesystem::path& out_dir,
                                                      EmitFlags flags) {
  ensure_dir(out_dir);
  std::vector<std::filesystem::path> written;
  const std::string stem(policy_name(r.policy));
  if (flags.json) {
    written.push_back(out_dir / (stem + ".json"));
    write_file(written.back(), policy_result_to_json(r, problem, samples).dump(2) + "\n");
  }
  if (flags.csv) {
    written.push_back(out_dir / (stem + ".csv"));
    write_file(written.back(), policy_result_csv(r, problem));
  }
  if (flags.svg) {
    written.push_back(out_dir / (stem + ".svg"));
    std::vector<SvgSeries> series;
    if (r.error.empty()) {
      series.push_back({series_label(r), r.report.trajectory,
                        r.policy == LinearizationPolicy::Fixed ? kFixedColor : kIterativeColor});
    }
    write_file(written.back(), render_trajectory_svg(problem, series, series_label(r)));
  }
  return written;
}

std::vector<std::filesystem::path> emit_comparison(const ComparisonReport& report,
                                                   const TrajectoryProblem& problem,
                                                   const std::filesystem::path& out_dir,
                                                   EmitFlags flags) {
  std::vector<std::filesystem::path> written;
  for (const PolicyResult& r : report.results) {
    auto files = emit_policy_result(r, problem, report.samples, out_dir, flags);
    written.insert(written.end(), files.begin(), files.end());
  }
  ensure_dir(out_dir);
  if (flags.json) {
    written.push_back(out_dir / "comparison.json");
    write_file(written.back(), comparison_to_json(report, problem).dump(2) + "\n");
  }
  if (flags.svg) {
    written.push_back(out_dir / "comparison.svg");
    std::vector<SvgSeries> series;
    for (const PolicyResult& r : report.results) {
      if (!r.error.empty()) continue;
      series.push_back({series_label(r), r.report.trajectory,
                        r.policy == LinearizationPolicy::Fixed ? kFixedColor : kIterativeColor});
    }
    write_file(written.back(),
               render_trajectory_svg(problem, series, "scenario " + report.scenario));
  }
  return written;
}

}  // namespace ccscp
