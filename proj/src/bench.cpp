#include "ccscp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "ccscp/errors.hpp"
#include "ccscp/rng.hpp"

namespace ccscp {

TrajectoryProblem Scenario::problem() const {
  TrajectoryProblem p;
  p.start = start;
  p.goal = goal;
  p.N = N;
  p.dt = dt;
  p.dynamics = dynamics;
  p.weights = weights;
  p.u_max = u_max;
  p.robot_radius = robot_radius;
  p.robot_cov = robot_cov;
  p.delta = delta;
  if (N < 1) throw ValidationError("horizon/steps", "must be >= 1");
  if (!(dt > 0.0)) throw ValidationError("horizon/dt", "must be > 0");
  for (const ObstacleModel& m : obstacles) {
    std::vector<GaussianDisc> seq;
    seq.reserve(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) {
      seq.push_back(propagate_obstacle(m.initial, m.velocity, m.cov_growth, k, dt));
    }
    p.obstacles.push_back(std::move(seq));
  }
  p.validate();
  return p;
}

ScpOptions Scenario::options() const {
  ScpOptions o = solver;
  o.fallback_seed = seed;
  return o;
}

Scenario canonical_benchmark() {
  Scenario s;
  s.name = "canonical";
  s.seed = 0;
  s.start = {0.0, 0.0};
  s.goal = {6.0, 0.0};
  s.N = 20;
  s.dt = 0.2;
  s.dynamics = Dynamics::SingleIntegrator;
  s.u_max = 2.0;
  s.robot_radius = 0.3;
  s.robot_cov = Cov2::zero();
  s.delta = ChanceLevel::make(0.03);
  s.obstacles.push_back(ObstacleModel{
      GaussianDisc::make({3.0, 0.0}, Cov2::isotropic(0.02), 0.4), {0.0, 0.0},
      Cov2::isotropic(0.005)});
  return s;
}

Scenario no_obstacle_benchmark() {
  Scenario s = canonical_benchmark();
  s.name = "no-obstacle";
  s.obstacles.clear();
  return s;
}

Scenario offset_benchmark(double offset) {
  Scenario s = canonical_benchmark();
  s.name = "offset";
  s.obstacles.front().initial.mean.y += offset;
  return s;
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name == "canonical") return canonical_benchmark();
  if (name == "no-obstacle") return no_obstacle_benchmark();
  if (name == "offset") return offset_benchmark(3.0);
  return std::nullopt;
}

double monte_carlo_bound(double delta, std::size_t samples) {
  return delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(samples));
}

std::vector<double> validate_trajectory(const Trajectory& traj, const TrajectoryProblem& problem,
                                        std::size_t samples, std::uint64_t seed,
                                        unsigned workers) {
  if (samples < 1000) throw ValidationError("samples", "must be >= 1000");
  if (static_cast<int>(traj.positions.size()) != problem.N + 1) {
    throw ValidationError("trajectory", "must have N + 1 positions");
  }
  const Trajectory replay = rollout(problem, traj.inputs);
  for (std::size_t k = 0; k < replay.positions.size(); ++k) {
    const Vec2 d = replay.positions[k] - traj.positions[k];
    if (std::max(std::abs(d.x), std::abs(d.y)) > 1e-9) {
      throw ValidationError("trajectory/positions/" + std::to_string(k),
                            "not consistent with the dynamics");
    }
  }
  std::vector<double> prob(traj.positions.size(), 0.0);
  for (std::size_t k = 0; k < traj.positions.size(); ++k) {
    const std::uint64_t step_key = rng::derive_key(seed, k);
    for (std::size_t o = 0; o < problem.obstacles.size(); ++o) {
      const double p = chance_probability_oracle(
          traj.positions[k], problem.obstacles[o][k], problem.robot_radius, problem.robot_cov,
          samples, rng::derive_key(step_key, o), workers);
      prob[k] = std::max(prob[k], p);
    }
  }
  return prob;
}

std::vector<double> constraint_profile(const Trajectory& traj, const TrajectoryProblem& problem,
                                       std::uint64_t fallback_seed) {
  if (problem.obstacles.empty()) return {};
  const Vec2 fallback = fallback_direction(fallback_seed);
  std::vector<double> g(traj.positions.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < traj.positions.size(); ++k) {
    for (const auto& seq : problem.obstacles) {
      g[k] = std::min(g[k], chance_constraint_value(traj.positions[k], seq[k],
                                                    problem.robot_radius, problem.robot_cov,
                                                    problem.delta, fallback));
    }
  }
  return g;
}

const PolicyResult& ComparisonReport::result(LinearizationPolicy policy) const {
  for (const PolicyResult& r : results) {
    if (r.policy == policy) return r;
  }
  throw std::out_of_range("comparison report has no result for policy");
}

PolicyResult run_policy(const Scenario& scenario, LinearizationPolicy policy,
                        const ComparisonOptions& options) {
  PolicyResult out;
  out.policy = policy;
  try {
    const TrajectoryProblem problem = scenario.problem();
    const ScpOptions scp = scenario.options();
    out.report = solve(problem, policy, straight_line_guess(problem), scp);
    out.failed = is_failure(out.report, scp);
    out.constraint_value = constraint_profile(out.report.trajectory, problem, scp.fallback_seed);
    out.mc_probability = validate_trajectory(out.report.trajectory, problem, options.samples,
                                             scenario.seed, options.workers);
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

ComparisonReport run_comparison(const Scenario& scenario, const ComparisonOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  ComparisonReport report;
  report.scenario = scenario.name;
  report.seed = scenario.seed;
  report.delta = scenario.delta.value();
  report.samples = options.samples;
  report.mc_bound = monte_carlo_bound(report.delta, options.samples);

  if (options.parallel_policies) {
    auto fixed = std::async(std::launch::async, run_policy, std::cref(scenario),
                            LinearizationPolicy::Fixed, std::cref(options));
    PolicyResult iterative = run_policy(scenario, LinearizationPolicy::Iterative, options);
    report.results.push_back(fixed.get());
    report.results.push_back(std::move(iterative));
  } else {
    report.results.push_back(run_policy(scenario, LinearizationPolicy::Fixed, options));
    report.results.push_back(run_policy(scenario, LinearizationPolicy::Iterative, options));
  }
  report.total_wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace ccscp
