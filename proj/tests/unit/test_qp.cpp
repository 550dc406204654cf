#include <doctest.h>

#include <cmath>
#include <random>

#include "ccscp/errors.hpp"
#include "ccscp/qp.hpp"
#include "oracles.hpp"

using namespace ccscp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct RandomQP {
  DenseQP qp;
  MatrixXd G_all;  // rows plus bounds, for the oracle
  VectorXd h_all;
};

RandomQP random_qp(std::mt19937_64& rng, int n, int m, bool bounds) {
  std::normal_distribution<double> N01;
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  RandomQP r;
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = N01(rng);
  r.qp.H = M.transpose() * M + 0.1 * MatrixXd::Identity(n, n);
  r.qp.f = VectorXd(n);
  for (int i = 0; i < n; ++i) r.qp.f(i) = 3.0 * N01(rng);
  VectorXd x0(n);
  for (int i = 0; i < n; ++i) x0(i) = N01(rng);
  r.qp.G = MatrixXd(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) r.qp.G(i, j) = N01(rng);
  r.qp.h = r.qp.G * x0;
  for (int i = 0; i < m; ++i) r.qp.h(i) += U01(rng);
  r.G_all = r.qp.G;
  r.h_all = r.qp.h;
  if (bounds) {
    VectorXd lb(n), ub(n);
    for (int i = 0; i < n; ++i) {
      lb(i) = x0(i) - 0.1 - U01(rng);
      ub(i) = x0(i) + 0.1 + U01(rng);
    }
    r.qp.lb = lb;
    r.qp.ub = ub;
    r.G_all.conservativeResize(m + 2 * n, n);
    r.h_all.conservativeResize(m + 2 * n);
    r.G_all.bottomRows(2 * n).setZero();
    for (int i = 0; i < n; ++i) {
      r.G_all(m + i, i) = 1.0;
      r.h_all(m + i) = ub(i);
      r.G_all(m + n + i, i) = -1.0;
      r.h_all(m + n + i) = -lb(i);
    }
  }
  return r;
}

}  // namespace

TEST_CASE("unconstrained minimum") {
  DenseQP qp;
  qp.H = MatrixXd::Identity(3, 3);
  const VectorXd b = (VectorXd(3) << 1.0, -2.0, 0.5).finished();
  qp.f = -b;
  qp.G = MatrixXd(0, 3);
  qp.h = VectorXd(0);
  const auto s = solve_qp(qp);
  CHECK(s.status == QPStatus::Optimal);
  CHECK((s.x - b).norm() < 1e-14);
  CHECK(kkt_residual(qp, b, VectorXd(0)) == 0.0);
}

TEST_CASE("one dimensional active case") {
  DenseQP qp;
  qp.H = MatrixXd::Identity(1, 1);
  qp.f = VectorXd::Zero(1);
  qp.G = MatrixXd::Constant(1, 1, -1.0);
  qp.h = VectorXd::Constant(1, -1.0);
  const auto s = solve_qp(qp);
  CHECK(s.status == QPStatus::Optimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.active_rows == std::vector<int>{0});
  CHECK(s.duals.ineq(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kkt_residual(qp, VectorXd::Ones(1), VectorXd::Ones(1)) <= 1e-12);
}

TEST_CASE("KKT residual grows linearly under perturbation") {
  std::mt19937_64 rng(99);
  const auto r = random_qp(rng, 5, 6, false);
  const auto s = solve_qp(r.qp);
  REQUIRE(s.status == QPStatus::Optimal);
  CHECK(s.kkt_residual <= 1e-8);
  const VectorXd e1 = VectorXd::Unit(5, 0);
  const double r1 = kkt_residual(r.qp, s.x + 1e-4 * e1, s.duals);
  const double r2 = kkt_residual(r.qp, s.x + 2e-4 * e1, s.duals);
  const double r4 = kkt_residual(r.qp, s.x + 4e-4 * e1, s.duals);
  CHECK(r1 > 1e-7);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(r4 / r2 == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("random QPs match exhaustive active-set enumeration") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const bool bounds = trial % 3 == 0;
    const int n = bounds ? 1 + trial % 4 : 1 + trial % 8;
    const int m = bounds ? trial % 5 : 1 + (trial * 7) % 10;
    const auto r = random_qp(rng, n, m, bounds);
    const auto ref = oracle::qp_enumerate(r.qp.H, r.qp.f, r.G_all, r.h_all);
    REQUIRE(ref.has_value());
    const auto s = solve_qp(r.qp);
    INFO("trial " << trial);
    REQUIRE(s.status == QPStatus::Optimal);
    CHECK((s.x - ref->x).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::fabs(s.objective - ref->objective) <= 1e-8);
    CHECK(s.kkt_residual <= 1e-8);
    ++checked;
  }
  CHECK(checked >= 200);
}

TEST_CASE("6 variables, 8 constraints") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = random_qp(rng, 6, 8, false);
    const auto ref = oracle::qp_enumerate(r.qp.H, r.qp.f, r.G_all, r.h_all);
    const auto s = solve_qp(r.qp);
    CHECK((s.x - ref->x).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("argmin invariant under cost scaling") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto r = random_qp(rng, 6, 7, trial % 2 == 0);
    const auto s = solve_qp(r.qp);
    for (double alpha : {1e-3, 0.5, 7.0, 1e3}) {
      DenseQP q = r.qp;
      q.H *= alpha;
      q.f *= alpha;
      const auto t = solve_qp(q);
      CHECK((t.x - s.x).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("infeasible problem is reported") {
  DenseQP qp;
  qp.H = MatrixXd::Identity(2, 2);
  qp.f = VectorXd::Zero(2);
  qp.G = (MatrixXd(2, 2) << 1, 0, -1, 0).finished();
  qp.h = (VectorXd(2) << 0.0, -1.0).finished();
  CHECK(solve_qp(qp).status == QPStatus::Infeasible);

  qp.G = MatrixXd(0, 2);
  qp.h = VectorXd(0);
  qp.lb = VectorXd::Constant(2, 1.0);
  qp.ub = VectorXd::Constant(2, 0.0);
  CHECK_THROWS_AS(qp.validate(), ValidationError);
}

TEST_CASE("semidefinite Hessians") {
  // Linear objective bounded by constraints.
  DenseQP qp;
  qp.H = MatrixXd::Zero(2, 2);
  qp.H(0, 0) = 1.0;
  qp.f = (VectorXd(2) << -1.0, 1.0).finished();
  qp.G = MatrixXd(0, 2);
  qp.h = VectorXd(0);
  qp.lb = VectorXd::Constant(2, -2.0);
  qp.ub = VectorXd::Constant(2, 2.0);
  auto s = solve_qp(qp);
  CHECK(s.status == QPStatus::Optimal);
  CHECK(s.x(0) == doctest::Approx(1.0));
  CHECK(s.x(1) == doctest::Approx(-2.0));

  qp.lb.reset();
  qp.ub.reset();
  CHECK(solve_qp(qp).status == QPStatus::Unbounded);
}

TEST_CASE("deterministic") {
  std::mt19937_64 rng(12);
  const auto r = random_qp(rng, 8, 10, false);
  const auto a = solve_qp(r.qp);
  const auto b = solve_qp(r.qp);
  CHECK(a.x == b.x);
  CHECK(a.active_rows == b.active_rows);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("feasible start is used") {
  std::mt19937_64 rng(13);
  const auto r = random_qp(rng, 4, 5, true);
  QPOptions opt;
  opt.x0 = VectorXd::Zero(4);
  const auto a = solve_qp(r.qp, opt);
  const auto b = solve_qp(r.qp);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-9);
}
