#pragma once

// Dense convex QP
//
//   minimize    1/2 x^T H x + f^T x
//   subject to  G x <= h,  lb <= x <= ub
//
// solved by a primal active-set method. H only needs to be positive
// semidefinite: directions of zero curvature in the working subspace are
// followed to the next blocking constraint instead of being regularized away.
// Infeasible starting points go through a phase-1 program (minimize the
// largest violation) solved by the same active-set iteration.

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

namespace ccscp {

struct DenseQP {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd G;  // m x n, may have zero rows
  Eigen::VectorXd h;
  /// Optional box bounds; entries may be -inf / +inf.
  std::optional<Eigen::VectorXd> lb;
  std::optional<Eigen::VectorXd> ub;

  Eigen::Index num_vars() const noexcept { return f.size(); }
  Eigen::Index num_ineq() const noexcept { return h.size(); }

  /// Throws ValidationError on inconsistent dimensions, non-finite data,
  /// asymmetric H (tolerance 1e-10 relative to its largest entry) or lb > ub.
  void validate() const;
};

enum class QPStatus { Optimal, Infeasible, MaxIter, Unbounded };
std::string_view qp_status_name(QPStatus s) noexcept;

/// Lagrange multipliers for G x <= h and the two bound sides, all >= 0 at a
/// KKT point: H x + f + G^T ineq + upper - lower = 0.
struct QPMultipliers {
  Eigen::VectorXd ineq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct QPOptions {
  double tol_kkt = 1e-8;
  int max_iter = 200;
  /// Starting point. Used directly when feasible, otherwise as the phase-1 seed.
  std::optional<Eigen::VectorXd> x0;
};

struct QPSolution {
  Eigen::VectorXd x;
  QPStatus status = QPStatus::MaxIter;
  double kkt_residual = 0.0;
  int iterations = 0;
  QPMultipliers duals;
  double objective = 0.0;
  /// Diagonal shift added to H when it was slightly indefinite (0 otherwise).
  double regularization = 0.0;
  /// Inequality rows in the final working set, ascending.
  std::vector<int> active_rows;
};

QPSolution solve_qp(const DenseQP& qp, const QPOptions& options = {});

double qp_objective(const DenseQP& qp, const Eigen::VectorXd& x);

/// Max of the stationarity, primal feasibility, dual nonnegativity and
/// complementarity residuals (infinity norms).
double kkt_residual(const DenseQP& qp, const Eigen::VectorXd& x, const QPMultipliers& duals);

/// Overload for problems without box bounds.
double kkt_residual(const DenseQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& ineq_duals);

}  // namespace ccscp
