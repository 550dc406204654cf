// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ccscp/bench.hpp"
#include "ccscp/qp.hpp"
#include "ccscp/report_io.hpp"
#include "oracles.hpp"

using namespace ccscp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome local_minimum_contrast() {
  const auto t0 = Clock::now();
  const Scenario s = canonical_benchmark();
  const TrajectoryProblem p = s.problem();
  const Trajectory guess = straight_line_guess(p);
  const ScpOptions o = s.options();
  const SolveReport it = solve(p, LinearizationPolicy::Iterative, guess, o);
  const SolveReport fx = solve(p, LinearizationPolicy::Fixed, guess, o);
  const double t = seconds_since(t0);
  const bool pass = it.status == SolveStatus::Converged && it.slack_used == 0.0 &&
                    it.goal_error <= 1e-3 && !is_failure(it, o) && is_failure(fx, o) && t < 5.0;
  return {pass, fmt("iterative %s slack=%g goal_error=%.3g; fixed %s slack=%.3g goal_error=%.3g "
                    "classified %s; %.3fs",
                    std::string(solve_status_name(it.status)).c_str(), it.slack_used, it.goal_error,
                    std::string(solve_status_name(fx.status)).c_str(), fx.slack_used, fx.goal_error,
                    is_failure(fx, o) ? "failure" : "success", t)};
}

Outcome timing() {
  const Scenario s = canonical_benchmark();
  const TrajectoryProblem p = s.problem();
  ComparisonOptions opts;
  opts.samples = 1000;
  const PolicyResult r = run_policy(s, LinearizationPolicy::Iterative, opts);
  const auto j = policy_result_to_json(r, p, opts.samples);
  const bool recorded = j.contains("wall_time") && j["wall_time"].get<double>() > 0.0;
  const bool pass = r.error.empty() && r.report.wall_time <= 0.5 &&
                    r.report.iterations <= 50 && recorded;
  return {pass, fmt("wall_time=%.4fs iterations=%d recorded=%s", r.report.wall_time,
                    r.report.iterations, recorded ? "yes" : "no")};
}

Outcome soundness() {
  const auto t0 = Clock::now();
  const Scenario s = canonical_benchmark();
  const TrajectoryProblem p = s.problem();
  const SolveReport it = solve(p, LinearizationPolicy::Iterative, straight_line_guess(p), s.options());
  const std::size_t n = 100000;
  const auto probs = validate_trajectory(it.trajectory, p, n, s.seed);
  const double bound = monte_carlo_bound(p.delta.value(), n);
  double worst = 0.0;
  for (double v : probs) worst = std::max(worst, v);
  const double t = seconds_since(t0);
  return {worst <= bound && t < 10.0,
          fmt("max per-step probability %.5f, bound %.5f; %.3fs", worst, bound, t)};
}

Outcome quantiles() {
  double worst = 0.0;
  for (double d : {0.01, 0.05, 0.1, 0.25}) {
    const double c = margin_coefficient(ChanceLevel::make(d));
    worst = std::max(worst, std::fabs(c - oracle::erf_inv_bisect(1.0 - 2.0 * d)));
  }
  return {worst <= 1e-8, fmt("max |c - oracle| = %.3g", worst)};
}

Outcome qp_oracle() {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> N01;
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  int count = 0, agree = 0;
  double dx = 0.0, dobj = 0.0;
  for (int trial = 0; trial < 250; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const int m = 1 + static_cast<int>(rng() % 10);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) M(i, k) = N01(rng);
    DenseQP qp;
    qp.H = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(n, n);
    qp.f = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) qp.f(i) = 3.0 * N01(rng);
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0(i) = N01(rng);
    qp.G = Eigen::MatrixXd(m, n);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < n; ++k) qp.G(i, k) = N01(rng);
    qp.h = qp.G * x0;
    for (int i = 0; i < m; ++i) qp.h(i) += U01(rng);
    const auto ref = oracle::qp_enumerate(qp.H, qp.f, qp.G, qp.h);
    const auto sol = solve_qp(qp);
    ++count;
    if (!ref || sol.status != QPStatus::Optimal) continue;
    const double ex = (sol.x - ref->x).cwiseAbs().maxCoeff();
    const double eo = std::fabs(sol.objective - ref->objective);
    dx = std::max(dx, ex);
    dobj = std::max(dobj, eo);
    if (ex <= 1e-6 && eo <= 1e-8) ++agree;
  }
  return {count >= 200 && agree == count,
          fmt("%d/%d agree, max dx=%.3g, max dobj=%.3g", agree, count, dx, dobj)};
}

Outcome gradients() {
  const Scenario s = canonical_benchmark();
  TrajectoryProblem p = s.problem();
  p.weights.Q = 0.3;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec2> u(p.N);
    for (auto& v : u) v = {U(rng), U(rng)};
    const Trajectory t = rollout(p, u);
    const auto sub = build_subproblem(p, t, 0.5, 1e4, s.options());
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < 2 * p.N; ++i) {
      const double h = 1e-5;
      auto up = u, dn = u;
      (i % 2 ? up[i / 2].y : up[i / 2].x) += h;
      (i % 2 ? dn[i / 2].y : dn[i / 2].x) -= h;
      const double fd = (trajectory_objective(p, rollout(p, up)) -
                         trajectory_objective(p, rollout(p, dn))) / (2 * h);
      err = std::max(err, std::fabs(fd - sub.qp.f(i)));
      scale = std::max(scale, std::fabs(fd));
    }
    worst_rel = std::max(worst_rel, err / scale);
  }

  std::uniform_real_distribution<double> P(-3.0, 3.0);
  double worst_res = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2 mean{P(rng), P(rng)}, q{P(rng), P(rng)};
    const auto obs = GaussianDisc::make(mean, Cov2::zero(), 0.4);
    const auto c = linearize_collision(q, obs, 0.3, Cov2::zero(), ChanceLevel::make(0.03), 0);
    const double truth = std::hypot(q.x - mean.x, q.y - mean.y) - 0.7;
    worst_res = std::max(worst_res, std::fabs(constraint_residual(c, q) - truth));
  }
  return {worst_rel <= 1e-5 && worst_res <= 1e-9,
          fmt("gradient rel err %.3g, zero-cov residual err %.3g", worst_rel, worst_res)};
}

Outcome policy_equivalence() {
  const Scenario s = no_obstacle_benchmark();
  const TrajectoryProblem p = s.problem();
  const Trajectory g = straight_line_guess(p);
  const SolveReport a = solve(p, LinearizationPolicy::Fixed, g, s.options());
  const SolveReport b = solve(p, LinearizationPolicy::Iterative, g, s.options());
  double d = 0.0;
  for (std::size_t k = 0; k < a.trajectory.positions.size(); ++k) {
    d = std::max(d, (a.trajectory.positions[k] - b.trajectory.positions[k]).norm());
  }
  for (std::size_t k = 0; k < a.trajectory.inputs.size(); ++k) {
    d = std::max(d, (a.trajectory.inputs[k] - b.trajectory.inputs[k]).norm());
  }
  return {d <= 1e-8, fmt("max difference %.3g", d)};
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "ccscp_acceptance_det";
  fs::remove_all(base);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(CCSCP_CLI_PATH) +
                            " compare --scenario canonical --seed 7 --out " +
                            (base / run).string() + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "compare exited nonzero"};
  }
  int files = 0, identical = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    ++files;
    const fs::path other = base / "b" / entry.path().filename();
    std::string x = read_file(entry.path()), y = read_file(other);
    if (entry.path().extension() == ".json") {
      auto jx = nlohmann::ordered_json::parse(x), jy = nlohmann::ordered_json::parse(y);
      strip_timing(jx);
      strip_timing(jy);
      x = jx.dump(2);
      y = jy.dump(2);
    }
    if (x == y) ++identical;
  }
  fs::remove_all(base);
  return {files == 8 && identical == files,
          fmt("%d/%d files identical after timing normalization", identical, files)};
}

Outcome perturbation() {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> U(-0.2, 0.2);
  int ok = 0, fixed_failures = 0;
  double lo = 1.0, hi = -1.0;
  for (int i = 0; i < 20; ++i) {
    const double off = U(rng);
    lo = std::min(lo, off);
    hi = std::max(hi, off);
    const Scenario s = offset_benchmark(off);
    const TrajectoryProblem p = s.problem();
    const Trajectory g = straight_line_guess(p);
    const SolveReport it = solve(p, LinearizationPolicy::Iterative, g, s.options());
    const SolveReport fx = solve(p, LinearizationPolicy::Fixed, g, s.options());
    if (!is_failure(it, s.options())) ++ok;
    if (is_failure(fx, s.options())) ++fixed_failures;
  }
  return {ok == 20, fmt("iterative %d/20 succeed (offsets %.3f..%.3f); fixed failed %d/20", ok,
                        lo, hi, fixed_failures)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"local-minimum contrast", local_minimum_contrast},
      {"timing", timing},
      {"chance-constraint soundness", soundness},
      {"quantile correctness", quantiles},
      {"QP oracle equivalence", qp_oracle},
      {"gradient and linearization checks", gradients},
      {"policy equivalence without obstacles", policy_equivalence},
      {"determinism", determinism},
      {"perturbation robustness", perturbation},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d (%s): %s  %s\n", index, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    if (!o.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
