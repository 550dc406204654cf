#include "ccscp/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <vector>

#include "ccscp/errors.hpp"

namespace ccscp {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "/" + std::string(key);
}

// Object view that rejects keys outside `allowed` and reports field paths.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ValidationError(path_.empty() ? "$" : path_, "must be an object");
    for (const auto& item : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
        throw ValidationError(join(path_, item.key()), "unknown field");
      }
    }
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  std::string path(std::string_view key) const { return join(path_, key); }

  const json& required(std::string_view key) const {
    const auto it = j_.find(std::string(key));
    if (it == j_.end()) throw ValidationError(path(key), "required field is missing");
    return *it;
  }

  double number(std::string_view key) const { return as_number(required(key), path(key)); }
  double number_or(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  static double as_number(const json& v, const std::string& p) {
    if (!v.is_number()) throw ValidationError(p, "must be a number");
    return v.get<double>();
  }

 private:
  const json& j_;
  std::string path_;
};

Vec2 parse_vec2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ValidationError(path, "must be an array [x, y]");
  const Vec2 out{ObjectReader::as_number(v[0], path + "/0"),
                 ObjectReader::as_number(v[1], path + "/1")};
  if (!out.is_finite()) throw ValidationError(path, "must be finite");
  return out;
}

Cov2 parse_cov(const json& v, const std::string& path) {
  const ObjectReader r(v, path, {"xx", "xy", "yy"});
  try {
    return Cov2::make(r.number("xx"), r.number("xy"), r.number("yy"));
  } catch (const ValidationError& e) {
    // Re-anchor the message at the full field path.
    const std::string what = e.what();
    throw ValidationError(path, what.substr(std::min(what.size(), e.field().size() + 2)));
  }
}

int parse_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ValidationError(path, "must be an integer");
  return v.get<int>();
}

ScpOptions parse_solver(const json& v, const std::string& path) {
  const ObjectReader r(v, path,
                       {"max_scp_iter", "tol_step", "tol_feas", "trust_radius_init",
                        "trust_radius_min", "trust_radius_max", "slack_weight",
                        "soft_constraints", "qp_tol", "qp_max_iter"});
  ScpOptions o;
  if (r.has("max_scp_iter")) o.max_scp_iter = parse_int(r.required("max_scp_iter"), r.path("max_scp_iter"));
  o.tol_step = r.number_or("tol_step", o.tol_step);
  o.tol_feas = r.number_or("tol_feas", o.tol_feas);
  o.trust_radius_init = r.number_or("trust_radius_init", o.trust_radius_init);
  o.trust_radius_min = r.number_or("trust_radius_min", o.trust_radius_min);
  o.trust_radius_max = r.number_or("trust_radius_max", o.trust_radius_max);
  o.slack_weight = r.number_or("slack_weight", o.slack_weight);
  if (r.has("soft_constraints")) {
    const json& b = r.required("soft_constraints");
    if (!b.is_boolean()) throw ValidationError(r.path("soft_constraints"), "must be a boolean");
    o.soft_constraints = b.get<bool>();
  }
  o.qp_tol = r.number_or("qp_tol", o.qp_tol);
  if (r.has("qp_max_iter")) o.qp_max_iter = parse_int(r.required("qp_max_iter"), r.path("qp_max_iter"));
  o.validate();
  return o;
}

ObstacleModel parse_obstacle(const json& v, const std::string& path) {
  const ObjectReader r(v, path, {"mean", "velocity", "radius", "cov", "cov_growth"});
  ObstacleModel m;
  const Vec2 mean = parse_vec2(r.required("mean"), r.path("mean"));
  const Cov2 cov = r.has("cov") ? parse_cov(r.required("cov"), r.path("cov")) : Cov2::zero();
  const double radius = r.number("radius");
  if (!(radius >= 0.0)) throw ValidationError(r.path("radius"), "must be >= 0");
  m.initial = GaussianDisc::make(mean, cov, radius);
  m.velocity = r.has("velocity") ? parse_vec2(r.required("velocity"), r.path("velocity")) : Vec2{};
  m.cov_growth =
      r.has("cov_growth") ? parse_cov(r.required("cov_growth"), r.path("cov_growth")) : Cov2::zero();
  return m;
}

Scenario from_json(const json& j) {
  const ObjectReader r(j, "",
                       {"name", "seed", "start", "goal", "horizon", "dynamics", "weights",
                        "u_max", "delta", "robot", "obstacles", "solver"});
  Scenario s;
  const json& name = r.required("name");
  if (!name.is_string() || name.get<std::string>().empty()) {
    throw ValidationError("name", "must be a non-empty string");
  }
  s.name = name.get<std::string>();
  if (r.has("seed")) {
    const json& seed = r.required("seed");
    if (!seed.is_number_unsigned()) throw ValidationError("seed", "must be a nonnegative integer");
    s.seed = seed.get<std::uint64_t>();
  }
  s.start = parse_vec2(r.required("start"), "start");
  s.goal = parse_vec2(r.required("goal"), "goal");

  const ObjectReader horizon(r.required("horizon"), "horizon", {"steps", "dt"});
  s.N = parse_int(horizon.required("steps"), "horizon/steps");
  if (s.N < 1) throw ValidationError("horizon/steps", "must be >= 1");
  s.dt = horizon.number("dt");
  if (!(s.dt > 0.0)) throw ValidationError("horizon/dt", "must be > 0");

  if (r.has("dynamics")) {
    const json& d = r.required("dynamics");
    if (!d.is_string()) throw ValidationError("dynamics", "must be a string");
    s.dynamics = parse_dynamics(d.get<std::string>());
  }
  if (r.has("weights")) {
    const ObjectReader w(r.required("weights"), "weights", {"Q", "R", "Qf"});
    s.weights.Q = w.number_or("Q", s.weights.Q);
    s.weights.R = w.number_or("R", s.weights.R);
    s.weights.Qf = w.number_or("Qf", s.weights.Qf);
    for (auto [key, value] : {std::pair{"Q", s.weights.Q}, std::pair{"R", s.weights.R},
                              std::pair{"Qf", s.weights.Qf}}) {
      if (!(value >= 0.0)) throw ValidationError(std::string("weights/") + key, "must be >= 0");
    }
  }
  s.u_max = r.number("u_max");
  if (!(s.u_max > 0.0)) throw ValidationError("u_max", "must be > 0");
  s.delta = ChanceLevel::make(r.number("delta"));

  const ObjectReader robot(r.required("robot"), "robot", {"radius", "cov"});
  s.robot_radius = robot.number("radius");
  if (!(s.robot_radius >= 0.0)) throw ValidationError("robot/radius", "must be >= 0");
  s.robot_cov = robot.has("cov") ? parse_cov(robot.required("cov"), "robot/cov") : Cov2::zero();

  const json& obstacles = r.required("obstacles");
  if (!obstacles.is_array()) throw ValidationError("obstacles", "must be an array");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    s.obstacles.push_back(parse_obstacle(obstacles[i], "obstacles/" + std::to_string(i)));
  }
  if (r.has("solver")) s.solver = parse_solver(r.required("solver"), "solver");
  return s;
}

ordered_json vec2_json(const Vec2& v) { return ordered_json::array({v.x, v.y}); }

ordered_json cov_json(const Cov2& c) {
  ordered_json j;
  j["xx"] = c.xx();
  j["xy"] = c.xy();
  j["yy"] = c.yy();
  return j;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("; "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ParseError(line, column, what);
  }
  return from_json(j);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["start"] = vec2_json(s.start);
  j["goal"] = vec2_json(s.goal);
  j["horizon"] = {{"steps", s.N}, {"dt", s.dt}};
  j["dynamics"] = std::string(dynamics_name(s.dynamics));
  j["weights"] = {{"Q", s.weights.Q}, {"R", s.weights.R}, {"Qf", s.weights.Qf}};
  j["u_max"] = s.u_max;
  j["delta"] = s.delta.value();
  j["robot"] = {{"radius", s.robot_radius}, {"cov", cov_json(s.robot_cov)}};
  ordered_json obstacles = ordered_json::array();
  for (const ObstacleModel& m : s.obstacles) {
    ordered_json o;
    o["mean"] = vec2_json(m.initial.mean);
    o["velocity"] = vec2_json(m.velocity);
    o["radius"] = m.initial.radius;
    o["cov"] = cov_json(m.initial.cov);
    o["cov_growth"] = cov_json(m.cov_growth);
    obstacles.push_back(std::move(o));
  }
  j["obstacles"] = std::move(obstacles);
  const ScpOptions& o = s.solver;
  j["solver"] = {{"max_scp_iter", o.max_scp_iter},
                 {"tol_step", o.tol_step},
                 {"tol_feas", o.tol_feas},
                 {"trust_radius_init", o.trust_radius_init},
                 {"trust_radius_min", o.trust_radius_min},
                 {"trust_radius_max", o.trust_radius_max},
                 {"slack_weight", o.slack_weight},
                 {"soft_constraints", o.soft_constraints},
                 {"qp_tol", o.qp_tol},
                 {"qp_max_iter", o.qp_max_iter}};
  return j;
}

std::string serialize_scenario(const Scenario& scenario) {
  return scenario_to_json(scenario).dump(2) + "\n";
}

}  // namespace ccscp
