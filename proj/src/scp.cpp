#include "ccscp/scp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ccscp/errors.hpp"

namespace ccscp {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
// Accept a step when the merit drops by at least this fraction of the model
// prediction; grow the region past kExpandRatio.
constexpr double kAcceptRatio = 0.1;
constexpr double kExpandRatio = 0.75;

// dp_k / du_i (same for both axes); zero for i >= k.
double position_coefficient(const TrajectoryProblem& p, int k, int i) {
  if (i >= k) return 0.0;
  if (p.dynamics == Dynamics::SingleIntegrator) return p.dt;
  return p.dt * p.dt * (static_cast<double>(k - 1 - i) + 0.5);
}

double stage_weight(const TrajectoryProblem& p, int k) {
  return k == p.N ? p.weights.Qf : p.weights.Q;
}

double merit(const TrajectoryProblem& problem, const Trajectory& traj, double slack_weight,
             std::uint64_t fallback_seed) {
  double violation = 0.0;
  for (const auto& per_obstacle : chance_constraint_values(problem, traj, fallback_seed)) {
    for (double g : per_obstacle) violation += std::max(0.0, -g);
  }
  return trajectory_objective(problem, traj) + slack_weight * violation;
}

double step_norm(const Trajectory& a, const Trajectory& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.positions.size(); ++k) {
    s = std::max({s, std::abs(a.positions[k].x - b.positions[k].x),
                  std::abs(a.positions[k].y - b.positions[k].y)});
  }
  return s;
}

double goal_error(const TrajectoryProblem& problem, const Trajectory& traj) {
  return (traj.positions.back() - problem.goal).norm();
}

// Applies the QP increment and clips roundoff past the input bound.
Trajectory apply_increment(const TrajectoryProblem& problem, const Trajectory& lin,
                           const VectorXd& z) {
  std::vector<Vec2> inputs(lin.inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double ux = lin.inputs[i].x + z(2 * static_cast<Index>(i));
    const double uy = lin.inputs[i].y + z(2 * static_cast<Index>(i) + 1);
    inputs[i] = {std::clamp(ux, -problem.u_max, problem.u_max),
                 std::clamp(uy, -problem.u_max, problem.u_max)};
  }
  return rollout(problem, inputs);
}

double total_slack(const ConvexSubproblem& sub, const VectorXd& z) {
  double s = 0.0;
  for (int j = 0; j < sub.num_slacks; ++j) s += std::max(0.0, z(sub.num_inputs + j));
  return s;
}

void check_guess(const TrajectoryProblem& problem, const Trajectory& guess) {
  if (static_cast<int>(guess.inputs.size()) != problem.N ||
      static_cast<int>(guess.positions.size()) != problem.N + 1) {
    throw ValidationError("guess", "must have N inputs and N + 1 positions");
  }
  const Trajectory replay = rollout(problem, guess.inputs);
  if (step_norm(replay, guess) > 1e-9) {
    throw ValidationError("guess", "positions are not consistent with the dynamics");
  }
}

}  // namespace

std::string_view dynamics_name(Dynamics d) noexcept {
  return d == Dynamics::SingleIntegrator ? "single_integrator" : "double_integrator";
}

Dynamics parse_dynamics(std::string_view name) {
  if (name == "single_integrator") return Dynamics::SingleIntegrator;
  if (name == "double_integrator") return Dynamics::DoubleIntegrator;
  throw ValidationError("dynamics", "expected \"single_integrator\" or \"double_integrator\"");
}

std::string_view solve_status_name(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Stalled: return "stalled";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

void TrajectoryProblem::validate() const {
  if (!start.is_finite()) throw ValidationError("start", "must be finite");
  if (!goal.is_finite()) throw ValidationError("goal", "must be finite");
  if (N < 1) throw ValidationError("horizon", "N must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "must be > 0");
  if (!(u_max > 0.0) || !std::isfinite(u_max)) throw ValidationError("u_max", "must be > 0");
  if (!(weights.Q >= 0.0) || !(weights.R >= 0.0) || !(weights.Qf >= 0.0) ||
      !std::isfinite(weights.Q + weights.R + weights.Qf)) {
    throw ValidationError("weights", "Q, R and Qf must be finite and >= 0");
  }
  if (!(robot_radius >= 0.0) || !std::isfinite(robot_radius)) {
    throw ValidationError("robot.radius", "must be finite and >= 0");
  }
  for (std::size_t o = 0; o < obstacles.size(); ++o) {
    if (static_cast<int>(obstacles[o].size()) != N + 1) {
      throw ValidationError("obstacles/" + std::to_string(o),
                            "predicted sequence must have N + 1 entries");
    }
  }
}

void ScpOptions::validate() const {
  if (max_scp_iter < 1) throw ValidationError("solver.max_scp_iter", "must be >= 1");
  if (!(tol_step > 0.0)) throw ValidationError("solver.tol_step", "must be > 0");
  if (!(tol_feas > 0.0)) throw ValidationError("solver.tol_feas", "must be > 0");
  if (!(trust_radius_min > 0.0)) throw ValidationError("solver.trust_radius_min", "must be > 0");
  if (!(trust_radius_init >= trust_radius_min)) {
    throw ValidationError("solver.trust_radius_init", "must be >= trust_radius_min");
  }
  if (!(trust_radius_max >= trust_radius_init)) {
    throw ValidationError("solver.trust_radius_max", "must be >= trust_radius_init");
  }
  if (!(slack_weight > 0.0)) throw ValidationError("solver.slack_weight", "must be > 0");
  if (!(qp_tol > 0.0)) throw ValidationError("solver.qp_tol", "must be > 0");
  if (qp_max_iter < 1) throw ValidationError("solver.qp_max_iter", "must be >= 1");
}

Trajectory rollout(const TrajectoryProblem& problem, std::span<const Vec2> inputs) {
  if (static_cast<int>(inputs.size()) != problem.N) {
    throw ValidationError("inputs", "expected N = " + std::to_string(problem.N) + " inputs");
  }
  const double bound = problem.u_max * (1.0 + 1e-12);
  Trajectory t;
  t.inputs.assign(inputs.begin(), inputs.end());
  t.positions.reserve(inputs.size() + 1);
  t.positions.push_back(problem.start);
  Vec2 v{};
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Vec2 u = inputs[k];
    if (!u.is_finite() || std::abs(u.x) > bound || std::abs(u.y) > bound) {
      throw ValidationError("inputs/" + std::to_string(k), "exceeds u_max");
    }
    const Vec2 p = t.positions.back();
    if (problem.dynamics == Dynamics::SingleIntegrator) {
      t.positions.push_back(p + problem.dt * u);
    } else {
      t.positions.push_back(p + problem.dt * v + (0.5 * problem.dt * problem.dt) * u);
      v = v + problem.dt * u;
    }
  }
  return t;
}

Trajectory straight_line_guess(const TrajectoryProblem& problem) {
  const Vec2 d = problem.goal - problem.start;
  const double horizon = problem.N * problem.dt;
  // Single integrator: constant velocity. Double integrator: constant
  // acceleration from rest, which also stays on the line.
  Vec2 u = problem.dynamics == Dynamics::SingleIntegrator
               ? (1.0 / horizon) * d
               : (2.0 / (horizon * horizon)) * d;
  const double largest = std::max(std::abs(u.x), std::abs(u.y));
  if (largest > problem.u_max) u = (problem.u_max / largest) * u;
  const std::vector<Vec2> inputs(static_cast<std::size_t>(problem.N), u);
  return rollout(problem, inputs);
}

double trajectory_objective(const TrajectoryProblem& problem, const Trajectory& traj) {
  double j = 0.0;
  for (int k = 0; k <= problem.N; ++k) {
    const double w = stage_weight(problem, k);
    if (w != 0.0) {
      const Vec2 e = traj.positions[k] - problem.goal;
      j += w * e.dot(e);
    }
  }
  for (const Vec2& u : traj.inputs) j += problem.weights.R * u.dot(u);
  return j;
}

VectorXd objective_gradient(const TrajectoryProblem& problem, const Trajectory& traj) {
  const int N = problem.N;
  VectorXd grad = VectorXd::Zero(2 * N);
  for (int i = 0; i < N; ++i) {
    double gx = 2.0 * problem.weights.R * traj.inputs[i].x;
    double gy = 2.0 * problem.weights.R * traj.inputs[i].y;
    for (int k = i + 1; k <= N; ++k) {
      const double w = stage_weight(problem, k);
      if (w == 0.0) continue;
      const double c = position_coefficient(problem, k, i);
      gx += 2.0 * w * c * (traj.positions[k].x - problem.goal.x);
      gy += 2.0 * w * c * (traj.positions[k].y - problem.goal.y);
    }
    grad(2 * i) = gx;
    grad(2 * i + 1) = gy;
  }
  return grad;
}

std::vector<std::vector<double>> chance_constraint_values(const TrajectoryProblem& problem,
                                                          const Trajectory& traj,
                                                          std::uint64_t fallback_seed) {
  const Vec2 fallback = fallback_direction(fallback_seed);
  std::vector<std::vector<double>> values(problem.obstacles.size());
  for (std::size_t o = 0; o < problem.obstacles.size(); ++o) {
    values[o].reserve(static_cast<std::size_t>(problem.N));
    for (int k = 1; k <= problem.N; ++k) {
      values[o].push_back(chance_constraint_value(traj.positions[k], problem.obstacles[o][k],
                                                  problem.robot_radius, problem.robot_cov,
                                                  problem.delta, fallback));
    }
  }
  return values;
}

double max_chance_violation(const TrajectoryProblem& problem, const Trajectory& traj,
                            std::uint64_t fallback_seed) {
  double v = 0.0;
  for (const auto& per_obstacle : chance_constraint_values(problem, traj, fallback_seed)) {
    for (double g : per_obstacle) v = std::max(v, -g);
  }
  return v;
}

ConvexSubproblem build_subproblem(const TrajectoryProblem& problem, const Trajectory& lin_traj,
                                  double trust_radius, double slack_weight,
                                  const ScpOptions& options) {
  const int N = problem.N;
  const int nu = 2 * N;
  const Vec2 fallback = fallback_direction(options.fallback_seed);

  ConvexSubproblem sub;
  sub.num_inputs = nu;
  for (std::size_t o = 0; o < problem.obstacles.size(); ++o) {
    for (int k = 1; k <= N; ++k) {
      const GaussianDisc& obs = problem.obstacles[o][k];
      try {
        sub.constraints.push_back(linearize_collision(lin_traj.positions[k], obs,
                                                      problem.robot_radius, problem.robot_cov,
                                                      problem.delta, k));
      } catch (const DegenerateLinearization&) {
        sub.constraints.push_back(linearize_along(fallback, obs, problem.robot_radius,
                                                  problem.robot_cov, problem.delta, k));
        sub.fallback_used = true;
      }
      sub.constraint_obstacle.push_back(static_cast<int>(o));
    }
  }
  const int nc = static_cast<int>(sub.constraints.size());
  sub.num_slacks = options.soft_constraints ? nc : 0;
  const int n = nu + sub.num_slacks;

  // Position sensitivities, shared by both axes: C(k, i) = dp_k / du_i.
  MatrixXd C = MatrixXd::Zero(N + 1, N);
  for (int k = 1; k <= N; ++k) {
    for (int i = 0; i < k; ++i) C(k, i) = position_coefficient(problem, k, i);
  }

  DenseQP& qp = sub.qp;
  qp.H = MatrixXd::Zero(n, n);
  qp.f = VectorXd::Zero(n);

  MatrixXd Hs = (2.0 * problem.weights.R) * MatrixXd::Identity(N, N);
  for (int k = 1; k <= N; ++k) {
    const double w = stage_weight(problem, k);
    if (w != 0.0) Hs += (2.0 * w) * C.row(k).transpose() * C.row(k);
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      qp.H(2 * i, 2 * j) = Hs(i, j);
      qp.H(2 * i + 1, 2 * j + 1) = Hs(i, j);
    }
  }
  qp.f.head(nu) = objective_gradient(problem, lin_traj);
  for (int j = 0; j < sub.num_slacks; ++j) qp.f(nu + j) = slack_weight;
  sub.objective_offset = trajectory_objective(problem, lin_traj);

  const int rows = nc + 4 * N;
  qp.G = MatrixXd::Zero(rows, n);
  qp.h = VectorXd::Zero(rows);
  sub.feasible_start = VectorXd::Zero(n);
  int r = 0;
  // Collision: a^T p_k - b + s >= 0  ->  -a^T C_k du - s <= a^T p_k^lin - b.
  for (int c = 0; c < nc; ++c, ++r) {
    const LinearizedChanceConstraint& lc = sub.constraints[c];
    const int k = lc.step;
    for (int i = 0; i < k; ++i) {
      qp.G(r, 2 * i) = -lc.a.x * C(k, i);
      qp.G(r, 2 * i + 1) = -lc.a.y * C(k, i);
    }
    const double residual = constraint_residual(lc, lin_traj.positions[k]);
    qp.h(r) = residual;
    if (sub.num_slacks > 0) {
      qp.G(r, nu + c) = -1.0;
      sub.feasible_start(nu + c) = std::max(0.0, -residual);
    }
  }
  // Trust region: |C_k du|_inf <= trust_radius on every axis.
  for (int k = 1; k <= N; ++k) {
    for (int axis = 0; axis < 2; ++axis) {
      for (int sign : {1, -1}) {
        for (int i = 0; i < k; ++i) qp.G(r, 2 * i + axis) = sign * C(k, i);
        qp.h(r) = trust_radius;
        ++r;
      }
    }
  }

  VectorXd lb(n), ub(n);
  for (int i = 0; i < N; ++i) {
    lb(2 * i) = -problem.u_max - lin_traj.inputs[i].x;
    ub(2 * i) = problem.u_max - lin_traj.inputs[i].x;
    lb(2 * i + 1) = -problem.u_max - lin_traj.inputs[i].y;
    ub(2 * i + 1) = problem.u_max - lin_traj.inputs[i].y;
  }
  for (int j = 0; j < sub.num_slacks; ++j) {
    lb(nu + j) = 0.0;
    ub(nu + j) = kInf;
  }
  qp.lb = std::move(lb);
  qp.ub = std::move(ub);
  return sub;
}

SolveReport solve(const TrajectoryProblem& problem, LinearizationPolicy policy,
                  const Trajectory& guess, const ScpOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  problem.validate();
  options.validate();
  check_guess(problem, guess);

  const double w = options.slack_weight;
  SolveReport report;
  report.policy = policy;

  QPOptions qp_options;
  qp_options.tol_kkt = options.qp_tol;
  qp_options.max_iter = options.qp_max_iter;

  Trajectory current = guess;
  double rho = options.trust_radius_init;

  if (policy == LinearizationPolicy::Fixed) {
    const ConvexSubproblem sub = build_subproblem(problem, current, rho, w, options);
    qp_options.x0 = sub.feasible_start;
    const QPSolution sol = solve_qp(sub.qp, qp_options);
    report.iterations = 1;
    report.qp_iterations = sol.iterations;
    report.fallback_used = sub.fallback_used;
    if (sol.status == QPStatus::Infeasible) {
      report.status = SolveStatus::Infeasible;
    } else {
      const Trajectory next = apply_increment(problem, current, sol.x);
      report.last_step_norm = step_norm(next, current);
      report.slack_used = total_slack(sub, sol.x);
      current = next;
      const bool feasible =
          report.slack_used <= options.tol_feas &&
          max_chance_violation(problem, current, options.fallback_seed) <= options.tol_feas;
      if (sol.status != QPStatus::Optimal) {
        report.status = SolveStatus::MaxIter;
      } else {
        report.status = feasible ? SolveStatus::Converged : SolveStatus::Stalled;
      }
    }
  } else {
    double merit_current = merit(problem, current, w, options.fallback_seed);
    report.status = SolveStatus::MaxIter;
    // Slack of the model at the current iterate, before any QP has run.
    {
      double s = 0.0;
      for (const auto& per_obstacle :
           chance_constraint_values(problem, current, options.fallback_seed)) {
        for (double g : per_obstacle) s += std::max(0.0, -g);
      }
      report.slack_used = s;
    }
    for (int it = 0; it < options.max_scp_iter; ++it) {
      const ConvexSubproblem sub = build_subproblem(problem, current, rho, w, options);
      report.fallback_used = report.fallback_used || sub.fallback_used;
      qp_options.x0 = sub.feasible_start;
      const QPSolution sol = solve_qp(sub.qp, qp_options);
      ++report.iterations;
      report.qp_iterations += sol.iterations;
      if (sol.status == QPStatus::Infeasible) {
        report.status = SolveStatus::Infeasible;
        break;
      }

      bool accepted = false;
      if (sol.status == QPStatus::Optimal) {
        const Trajectory candidate = apply_increment(problem, current, sol.x);
        const double step = step_norm(candidate, current);
        const double slack = total_slack(sub, sol.x);
        const double merit_candidate = merit(problem, candidate, w, options.fallback_seed);

        if (step <= options.tol_step) {
          if (merit_candidate <= merit_current) {
            current = candidate;
            merit_current = merit_candidate;
            report.iterate_history.push_back(current);
            report.merit_history.push_back(merit_current);
          }
          report.last_step_norm = step;
          report.slack_used = slack;
          const bool feasible =
              slack <= options.tol_feas &&
              max_chance_violation(problem, current, options.fallback_seed) <= options.tol_feas;
          report.status = feasible ? SolveStatus::Converged : SolveStatus::Stalled;
          break;
        }

        const double predicted = merit_current - (sub.objective_offset + sol.objective);
        const double actual = merit_current - merit_candidate;
        if (predicted > 0.0 && actual >= kAcceptRatio * predicted) {
          accepted = true;
          current = candidate;
          merit_current = merit_candidate;
          report.iterate_history.push_back(current);
          report.merit_history.push_back(merit_current);
          report.last_step_norm = step;
          report.slack_used = slack;
          if (actual >= kExpandRatio * predicted && step >= 0.999 * rho) {
            rho = std::min(2.0 * rho, options.trust_radius_max);
          }
        }
      }
      if (!accepted) {
        rho *= 0.5;
        if (rho < options.trust_radius_min) {
          rho = options.trust_radius_min;
          report.status = SolveStatus::Stalled;
          break;
        }
      }
    }
  }

  report.trajectory = current;
  report.final_trust_radius = rho;
  report.objective = trajectory_objective(problem, current);
  report.goal_error = goal_error(problem, current);
  report.max_constraint_violation = max_chance_violation(problem, current, options.fallback_seed);
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

bool is_failure(const SolveReport& report, const ScpOptions& options) {
  return report.status == SolveStatus::Infeasible ||
         report.goal_error > 10.0 * options.tol_step || report.slack_used > options.tol_feas;
}

}  // namespace ccscp
