// ccscp: solve, compare and validate chance-constrained trajectories.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ccscp/bench.hpp"
#include "ccscp/errors.hpp"
#include "ccscp/report_io.hpp"
#include "ccscp/scenario_io.hpp"

namespace {

using namespace ccscp;

constexpr const char* kSchemaNote =
    "Scenario files are JSON; see docs/scenario_schema.md for every field and its unit.\n"
    "Built-in scenarios: canonical, no-obstacle, offset.\n";

struct RunConfig {
  std::string scenario = "canonical";
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::size_t samples = 100000;
  std::string out;
  std::string emit = "json,csv,svg";
  unsigned workers = 1;
  std::string policy;
  std::string trajectory;
};

// Thrown for bad flag values that CLI11 itself cannot check.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario load(const RunConfig& cfg) {
  Scenario s;
  if (auto b = builtin_scenario(cfg.scenario)) {
    s = *b;
  } else {
    s = load_scenario(cfg.scenario);
  }
  if (cfg.seed) s.seed = *cfg.seed;
  if (cfg.delta) {
    try {
      s.delta = ChanceLevel::make(*cfg.delta);
    } catch (const ValidationError& e) {
      throw UsageError(std::string("--delta: ") + e.what());
    }
  }
  if (cfg.samples < 1000) throw UsageError("--samples: must be at least 1000");
  return s;
}

EmitFlags emit_flags(const RunConfig& cfg) {
  try {
    return parse_emit_flags(cfg.emit);
  } catch (const ValidationError& e) {
    throw UsageError(std::string("--emit: ") + e.what());
  }
}

void print_summary(const PolicyResult& r) {
  std::printf("%-9s ", std::string(policy_name(r.policy)).c_str());
  if (!r.error.empty()) {
    std::printf("error: %s -> failure\n", r.error.c_str());
    return;
  }
  const SolveReport& rep = r.report;
  double worst = 0.0;
  for (double p : r.mc_probability) worst = std::max(worst, p);
  std::printf(
      "%s iterations=%d slack=%.3g violation=%.3g goal_error=%.3g max_mc=%.5f time=%.4fs -> %s\n",
      std::string(solve_status_name(rep.status)).c_str(), rep.iterations, rep.slack_used,
      rep.max_constraint_violation, rep.goal_error, worst, rep.wall_time,
      r.failed ? "failure" : "success");
}

void print_written(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
}

int run_solve(const RunConfig& cfg) {
  const Scenario s = load(cfg);
  LinearizationPolicy policy;
  try {
    policy = parse_policy(cfg.policy);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--policy: ") + e.what());
  }
  const EmitFlags flags = emit_flags(cfg);
  ComparisonOptions opts;
  opts.samples = cfg.samples;
  opts.workers = cfg.workers;
  const PolicyResult r = run_policy(s, policy, opts);
  print_summary(r);
  if (!cfg.out.empty()) print_written(emit_policy_result(r, s.problem(), cfg.samples, cfg.out, flags));
  return 0;
}

int run_compare(const RunConfig& cfg) {
  const Scenario s = load(cfg);
  const EmitFlags flags = emit_flags(cfg);
  ComparisonOptions opts;
  opts.samples = cfg.samples;
  opts.workers = cfg.workers;
  const ComparisonReport rep = run_comparison(s, opts);
  std::printf("scenario %s seed=%llu delta=%.17g mc_bound=%.6f\n", rep.scenario.c_str(),
              static_cast<unsigned long long>(rep.seed), rep.delta, rep.mc_bound);
  for (const PolicyResult& r : rep.results) print_summary(r);
  if (!cfg.out.empty()) print_written(emit_comparison(rep, s.problem(), cfg.out, flags));
  return 0;
}

int run_validate(const RunConfig& cfg) {
  const Scenario s = load(cfg);
  std::ifstream in(cfg.trajectory, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory file " + cfg.trajectory);
  std::stringstream buf;
  buf << in.rdbuf();
  const TrajectoryProblem problem = s.problem();
  const Trajectory traj = parse_trajectory(buf.str());
  const auto probs = validate_trajectory(traj, problem, cfg.samples, s.seed, cfg.workers);
  const double bound = monte_carlo_bound(problem.delta.value(), cfg.samples);
  std::printf("k,mc_probability\n");
  bool ok = true;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    std::printf("%zu,%s\n", k, nlohmann::json(probs[k]).dump().c_str());
    ok = ok && probs[k] <= bound;
  }
  std::printf("bound %.17g: %s\n", bound, ok ? "within" : "exceeded");
  return 0;
}

int run_quantile(double delta) {
  double c;
  try {
    c = margin_coefficient(ChanceLevel::make(delta));
  } catch (const ValidationError& e) {
    throw UsageError(std::string("--delta: ") + e.what());
  }
  std::printf("%.17g\n", c);
  return 0;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--scenario", cfg.scenario, "Built-in name or scenario JSON path")
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Override the scenario seed");
  sub->add_option("--delta", cfg.delta, "Override the chance level, in (0, 0.5)");
  sub->add_option("--samples", cfg.samples, "Monte-Carlo samples per step (>= 1000)")
      ->capture_default_str();
  sub->add_option("--workers", cfg.workers, "Monte-Carlo worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_output(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--out", cfg.out, "Output directory (nothing written if omitted)");
  sub->add_option("--emit", cfg.emit, "Comma separated subset of json,csv,svg")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained SCP trajectory planner"};
  app.footer(kSchemaNote);
  app.require_subcommand(1);

  RunConfig cfg;
  double quantile_delta = 0.0;

  auto* solve = app.add_subcommand("solve", "Solve one policy from the straight-line guess");
  solve->add_option("--policy", cfg.policy, "fixed or iterative")->required();
  add_common(solve, cfg);
  add_output(solve, cfg);

  auto* compare = app.add_subcommand("compare", "Run both policies and classify each");
  add_common(compare, cfg);
  add_output(compare, cfg);

  auto* validate = app.add_subcommand("validate", "Monte-Carlo check of a stored trajectory");
  validate->add_option("--trajectory", cfg.trajectory, "Report JSON or {positions, inputs}")
      ->required();
  add_common(validate, cfg);

  auto* quantile = app.add_subcommand("quantile", "Print erf_inv(1 - 2 delta)");
  quantile->add_option("--delta", quantile_delta, "Chance level in (0, 0.5)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*solve) return run_solve(cfg);
    if (*compare) return run_compare(cfg);
    if (*validate) return run_validate(cfg);
    if (*quantile) return run_quantile(quantile_delta);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
