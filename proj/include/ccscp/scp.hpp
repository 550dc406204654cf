#pragma once

// Sequential convex programming for a planar robot avoiding Gaussian
// obstacles. Each iteration linearizes the collision chance constraints at a
// trajectory, solves the resulting QP over input increments and nonnegative
// slacks inside a position trust region, and accepts or rejects the step on an
// exact L1 merit function.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ccscp/prob_core.hpp"
#include "ccscp/qp.hpp"
#include "ccscp/reform.hpp"

namespace ccscp {

enum class Dynamics { SingleIntegrator, DoubleIntegrator };

std::string_view dynamics_name(Dynamics d) noexcept;
Dynamics parse_dynamics(std::string_view name);

/// Running, input and terminal weights of
/// sum_{k<N} Q |p_k - goal|^2 + R |u_k|^2 + Qf |p_N - goal|^2.
struct CostWeights {
  double Q = 0.0;
  double R = 0.1;
  double Qf = 1e5;

  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

struct TrajectoryProblem {
  Vec2 start;
  Vec2 goal;
  int N = 20;
  double dt = 0.2;
  Dynamics dynamics = Dynamics::SingleIntegrator;
  CostWeights weights;
  /// Componentwise input bound (m/s for single, m/s^2 for double integrator).
  double u_max = 2.0;
  /// One predicted sequence of N + 1 discs per obstacle.
  std::vector<std::vector<GaussianDisc>> obstacles;
  double robot_radius = 0.0;
  Cov2 robot_cov;
  ChanceLevel delta = ChanceLevel::make(0.03);

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct Trajectory {
  std::vector<Vec2> positions;  // N + 1
  std::vector<Vec2> inputs;     // N

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct ScpOptions {
  int max_scp_iter = 50;
  double tol_step = 1e-5;
  double tol_feas = 1e-6;
  double trust_radius_init = 0.5;
  double trust_radius_min = 1e-4;
  double trust_radius_max = 2.0;
  double slack_weight = 1e4;
  /// Without slacks the collision constraints are hard and a subproblem may be
  /// infeasible.
  bool soft_constraints = true;
  double qp_tol = 1e-8;
  int qp_max_iter = 500;
  /// Seeds the degenerate-linearization fallback direction.
  std::uint64_t fallback_seed = 0;

  /// Throws ValidationError on non-positive tolerances or radii.
  void validate() const;

  friend bool operator==(const ScpOptions&, const ScpOptions&) = default;
};

enum class SolveStatus { Converged, Stalled, Infeasible, MaxIter };
std::string_view solve_status_name(SolveStatus s) noexcept;

struct SolveReport {
  LinearizationPolicy policy = LinearizationPolicy::Iterative;
  Trajectory trajectory;
  SolveStatus status = SolveStatus::MaxIter;
  /// Number of QP subproblems solved.
  int iterations = 0;
  int qp_iterations = 0;
  /// Accepted iterates, in order (empty for the Fixed policy).
  std::vector<Trajectory> iterate_history;
  /// Merit value of each accepted iterate, aligned with iterate_history.
  std::vector<double> merit_history;
  /// Largest violation of the nonlinear chance constraints (m).
  double max_constraint_violation = 0.0;
  /// Total slack of the last accepted subproblem solution (m).
  double slack_used = 0.0;
  double objective = 0.0;
  double last_step_norm = 0.0;
  double final_trust_radius = 0.0;
  double goal_error = 0.0;
  /// A linearization point coincided with an obstacle mean and the fallback
  /// direction was used.
  bool fallback_used = false;
  double wall_time = 0.0;
};

/// QP for one SCP iteration. Decision vector: input increments
/// (du_0x, du_0y, ..., du_{N-1}y) followed by one slack per collision
/// constraint (absent when soft constraints are disabled).
struct ConvexSubproblem {
  DenseQP qp;
  /// Nonlinear objective at the linearization trajectory; add to the QP
  /// objective to get the model merit.
  double objective_offset = 0.0;
  std::vector<LinearizedChanceConstraint> constraints;
  std::vector<int> constraint_obstacle;
  int num_inputs = 0;
  int num_slacks = 0;
  bool fallback_used = false;
  /// Feasible starting point (zero increment, slacks covering violations).
  Eigen::VectorXd feasible_start;
};

/// Throws ValidationError on wrong length or |u| > u_max.
Trajectory rollout(const TrajectoryProblem& problem, std::span<const Vec2> inputs);

/// Start-to-goal line, slowed uniformly when u_max binds.
Trajectory straight_line_guess(const TrajectoryProblem& problem);

double trajectory_objective(const TrajectoryProblem& problem, const Trajectory& traj);

/// Gradient of trajectory_objective with respect to the stacked inputs.
Eigen::VectorXd objective_gradient(const TrajectoryProblem& problem, const Trajectory& traj);

/// Nonlinear constraint value for every step k = 1..N and obstacle, indexed
/// [obstacle][k - 1].
std::vector<std::vector<double>> chance_constraint_values(const TrajectoryProblem& problem,
                                                          const Trajectory& traj,
                                                          std::uint64_t fallback_seed);

double max_chance_violation(const TrajectoryProblem& problem, const Trajectory& traj,
                            std::uint64_t fallback_seed);

ConvexSubproblem build_subproblem(const TrajectoryProblem& problem, const Trajectory& lin_traj,
                                  double trust_radius, double slack_weight,
                                  const ScpOptions& options = {});

SolveReport solve(const TrajectoryProblem& problem, LinearizationPolicy policy,
                  const Trajectory& guess, const ScpOptions& options = {});

/// A run fails iff it is infeasible, ends more than 10 * tol_step from the
/// goal, or needed more than tol_feas of slack.
bool is_failure(const SolveReport& report, const ScpOptions& options);

}  // namespace ccscp
