#pragma once

// Benchmark scenarios and the Fixed-vs-Iterative comparison runner.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccscp/scp.hpp"

namespace ccscp {

/// Constant-velocity obstacle with additively growing covariance.
struct ObstacleModel {
  GaussianDisc initial;
  Vec2 velocity;
  Cov2 cov_growth;

  friend bool operator==(const ObstacleModel&, const ObstacleModel&) = default;
};

/// Serializable benchmark description. `seed` drives the Monte-Carlo
/// validator and the degenerate-linearization fallback.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  Vec2 start;
  Vec2 goal;
  int N = 20;
  double dt = 0.2;
  Dynamics dynamics = Dynamics::SingleIntegrator;
  CostWeights weights;
  double u_max = 2.0;
  double robot_radius = 0.0;
  Cov2 robot_cov;
  ChanceLevel delta = ChanceLevel::make(0.03);
  std::vector<ObstacleModel> obstacles;
  ScpOptions solver;

  /// Expands obstacle models over the horizon; throws ValidationError.
  TrajectoryProblem problem() const;
  /// Solver options with the fallback seed taken from `seed`.
  ScpOptions options() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Repository default: start (0,0), goal (6,0), N = 20, dt = 0.2, one static
/// obstacle at (3,0) of radius 0.4 with cov 0.02 I growing 0.005 I per step,
/// robot radius 0.3, delta = 0.03, u_max = 2.
Scenario canonical_benchmark();

/// Canonical benchmark without its obstacle.
Scenario no_obstacle_benchmark();

/// Canonical benchmark with the obstacle shifted laterally by `offset` m.
Scenario offset_benchmark(double offset);

/// Built-in scenario by name ("canonical", "no-obstacle", "offset"), if any.
std::optional<Scenario> builtin_scenario(const std::string& name);

/// delta + 3 sqrt(delta (1 - delta) / samples).
double monte_carlo_bound(double delta, std::size_t samples);

/// Per-step (k = 0..N) collision probability estimate, the largest over all
/// obstacles. Throws ValidationError if samples < 1000 or the trajectory is
/// not consistent with the dynamics.
std::vector<double> validate_trajectory(const Trajectory& traj, const TrajectoryProblem& problem,
                                        std::size_t samples, std::uint64_t seed,
                                        unsigned workers = 1);

/// Per-step (k = 0..N) nonlinear chance-constraint value, the smallest over
/// all obstacles; empty when there are no obstacles.
std::vector<double> constraint_profile(const Trajectory& traj, const TrajectoryProblem& problem,
                                       std::uint64_t fallback_seed);

struct PolicyResult {
  LinearizationPolicy policy = LinearizationPolicy::Iterative;
  SolveReport report;
  bool failed = true;
  std::vector<double> constraint_value;
  std::vector<double> mc_probability;
  /// Set when the solver threw; the report is then empty.
  std::string error;
};

struct ComparisonOptions {
  std::size_t samples = 100000;
  unsigned workers = 1;
  /// Run both policies on separate threads.
  bool parallel_policies = false;
};

struct ComparisonReport {
  std::string scenario;
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::size_t samples = 0;
  double mc_bound = 0.0;
  /// Fixed first, then Iterative.
  std::vector<PolicyResult> results;
  double total_wall_time = 0.0;

  const PolicyResult& result(LinearizationPolicy policy) const;
};

/// Solves one policy from the straight-line guess and attaches the
/// Monte-Carlo estimates. Solver exceptions are captured in `error`.
PolicyResult run_policy(const Scenario& scenario, LinearizationPolicy policy,
                        const ComparisonOptions& options = {});

ComparisonReport run_comparison(const Scenario& scenario, const ComparisonOptions& options = {});

}  // namespace ccscp
