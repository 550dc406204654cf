#pragma once

// Reference computations that share no code with the library.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

// erf by its Maclaurin series in long double; fine for |x| <= 3.
inline long double erf_series(long double x) {
  const long double two_over_sqrt_pi = 1.1283791670955125738961589031215452L;
  long double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-30L) break;
  }
  return two_over_sqrt_pi * sum;
}

// erf_inv by bisection on std::erf over [0, 6].
inline double erf_inv_bisect(double y, double tol = 1e-15) {
  const double target = std::fabs(y);
  double lo = 0.0, hi = 6.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid) < target) lo = mid; else hi = mid;
  }
  const double r = 0.5 * (lo + hi);
  return y < 0 ? -r : r;
}

// Standard normal quantile by bisection on the CDF 0.5 erfc(-x / sqrt 2).
inline double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct QpOracleResult {
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
};

// min 0.5 x'Hx + f'x  s.t.  G x <= h, H positive definite. Enumerates every
// active set, keeps primal and dual feasible candidates, returns the best.
inline std::optional<QpOracleResult> qp_enumerate(const Eigen::MatrixXd& H,
                                                  const Eigen::VectorXd& f,
                                                  const Eigen::MatrixXd& G,
                                                  const Eigen::VectorXd& h) {
  const int n = static_cast<int>(f.size());
  const int m = static_cast<int>(h.size());
  std::optional<QpOracleResult> best;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i) if (mask & (1u << i)) act.push_back(i);
    const int k = static_cast<int>(act.size());
    if (k > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -f;
    for (int j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = G.row(act[j]).transpose();
      K.block(n + j, 0, 1, n) = G.row(act[j]);
      rhs(n + j) = h(act[j]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + k) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    if (((G * x - h).array() > 1e-9).any()) continue;
    if (k > 0 && (sol.tail(k).array() < -1e-9).any()) continue;
    const double obj = 0.5 * x.dot(H * x) + f.dot(x);
    if (!best || obj < best->objective) best = QpOracleResult{x, obj};
  }
  return best;
}

}  // namespace oracle
