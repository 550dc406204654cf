#include "ccscp/qp.hpp"

#include <algorithm>
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

// Curvature below this fraction of the largest reduced-Hessian eigenvalue is
// treated as zero.
constexpr double kZeroCurvature = 1e-11;

enum class Bound : unsigned char { Free, Lower, Upper };

struct EngineResult {
  VectorXd x;
  QPStatus status = QPStatus::MaxIter;
  std::vector<int> working_rows;
  std::vector<Bound> bounds;
  VectorXd row_duals;  // aligned with working_rows
};

// Primal active-set iteration from a feasible x. Active bounds are handled by
// fixing variables, active rows through a null-space basis of the free columns.
class ActiveSetEngine {
 public:
  ActiveSetEngine(const MatrixXd& H, const VectorXd& f, const MatrixXd& G, const VectorXd& h,
                  const VectorXd& lb, const VectorXd& ub)
      : H_(H), f_(f), G_(G), h_(h), lb_(lb), ub_(ub), n_(f.size()), m_(h.size()) {}

  EngineResult run(VectorXd x, int max_iter, int& iterations) {
    EngineResult res;
    std::vector<Bound> bounds(static_cast<std::size_t>(n_), Bound::Free);
    for (Index j = 0; j < n_; ++j) {
      if (x(j) <= lb_(j)) {
        x(j) = lb_(j);
        bounds[j] = Bound::Lower;
      } else if (x(j) >= ub_(j)) {
        x(j) = ub_(j);
        bounds[j] = Bound::Upper;
      }
    }
    std::vector<int> working;
    std::vector<char> in_working(static_cast<std::size_t>(m_), 0);
    // Set after an unblocked Newton step: x is then the minimizer on the
    // working set and the next step would only be roundoff.
    bool at_subspace_minimum = false;

    while (true) {
      const VectorXd g = H_ * x + f_;
      const double g_scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());

      std::vector<Index> free;
      free.reserve(static_cast<std::size_t>(n_));
      for (Index j = 0; j < n_; ++j) {
        if (bounds[j] == Bound::Free) free.push_back(j);
      }
      const Index nf = static_cast<Index>(free.size());
      const Index w = static_cast<Index>(working.size());

      VectorXd g_free(nf);
      for (Index a = 0; a < nf; ++a) g_free(a) = g(free[a]);

      // A^T (nf x w): working rows restricted to free columns.
      MatrixXd At(nf, w);
      for (Index r = 0; r < w; ++r) {
        for (Index a = 0; a < nf; ++a) At(a, r) = G_(working[r], free[a]);
      }
      Eigen::HouseholderQR<MatrixXd> qr;
      MatrixXd Q;
      if (w > 0) {
        qr.compute(At);
        Q = qr.householderQ() * MatrixXd::Identity(nf, nf);
      }
      const Index nz = nf - w;

      VectorXd p = VectorXd::Zero(n_);
      bool zero_curvature_step = false;
      if (nz > 0 && !at_subspace_minimum) {
        const MatrixXd Z = w > 0 ? MatrixXd(Q.rightCols(nz)) : MatrixXd::Identity(nf, nf);
        MatrixXd H_ff(nf, nf);
        for (Index a = 0; a < nf; ++a) {
          for (Index b = 0; b < nf; ++b) H_ff(a, b) = H_(free[a], free[b]);
        }
        MatrixXd Hz = Z.transpose() * H_ff * Z;
        Hz = 0.5 * (Hz + Hz.transpose()).eval();
        const VectorXd gz = Z.transpose() * g_free;
        const VectorXd pz = reduced_step(Hz, gz, g_scale, zero_curvature_step);
        const VectorXd p_free = Z * pz;
        for (Index a = 0; a < nf; ++a) p(free[a]) = p_free(a);
      }

      const double x_scale = 1.0 + x.lpNorm<Eigen::Infinity>();
      if (at_subspace_minimum || p.lpNorm<Eigen::Infinity>() <= 1e-13 * x_scale) {
        at_subspace_minimum = false;
        // Stationary on the working set: check multiplier signs.
        VectorXd lambda = VectorXd::Zero(w);
        if (w > 0) {
          const VectorXd rhs = -(Q.leftCols(w).transpose() * g_free);
          lambda = qr.matrixQR().topLeftCorner(w, w).triangularView<Eigen::Upper>().solve(rhs);
        }
        VectorXd grad_l = g;
        for (Index r = 0; r < w; ++r) grad_l += lambda(r) * G_.row(working[r]).transpose();

        const double tol_dual = 1e-12 * g_scale;
        double most_negative = -tol_dual;
        Index drop_row = -1;
        Index drop_var = -1;
        // Ties resolve to the lowest row index, then the lowest variable index.
        std::vector<Index> order(static_cast<std::size_t>(w));
        for (Index r = 0; r < w; ++r) order[r] = r;
        std::sort(order.begin(), order.end(),
                  [&](Index a, Index b) { return working[a] < working[b]; });
        for (Index r : order) {
          if (lambda(r) < most_negative) {
            most_negative = lambda(r);
            drop_row = r;
          }
        }
        for (Index j = 0; j < n_; ++j) {
          double mu = 0.0;
          if (bounds[j] == Bound::Lower) mu = grad_l(j);
          else if (bounds[j] == Bound::Upper) mu = -grad_l(j);
          else continue;
          if (mu < most_negative) {
            most_negative = mu;
            drop_var = j;
            drop_row = -1;
          }
        }
        if (drop_row < 0 && drop_var < 0) {
          res.x = std::move(x);
          res.status = QPStatus::Optimal;
          res.working_rows = working;
          res.bounds = std::move(bounds);
          res.row_duals = lambda;
          return res;
        }
        if (++iterations > max_iter) break;
        if (drop_var >= 0) {
          bounds[drop_var] = Bound::Free;
        } else {
          in_working[working[drop_row]] = 0;
          working.erase(working.begin() + drop_row);
        }
        continue;
      }

      if (++iterations > max_iter) break;

      // Ratio test; the first (lowest index) blocking constraint wins ties.
      double alpha = zero_curvature_step ? kInf : 1.0;
      Index block_row = -1;
      Index block_var = -1;
      const double p_norm = p.norm();
      for (Index i = 0; i < m_; ++i) {
        if (in_working[i]) continue;
        const double gp = G_.row(i).dot(p);
        if (gp <= 1e-14 * G_.row(i).norm() * p_norm) continue;
        const double room = std::max(0.0, h_(i) - G_.row(i).dot(x));
        const double a = room / gp;
        if (a < alpha) {
          alpha = a;
          block_row = i;
          block_var = -1;
        }
      }
      for (Index j = 0; j < n_; ++j) {
        if (bounds[j] != Bound::Free || p(j) == 0.0) continue;
        double a = kInf;
        if (p(j) < 0.0 && std::isfinite(lb_(j))) a = std::max(0.0, x(j) - lb_(j)) / -p(j);
        if (p(j) > 0.0 && std::isfinite(ub_(j))) a = std::max(0.0, ub_(j) - x(j)) / p(j);
        if (a < alpha) {
          alpha = a;
          block_var = j;
          block_row = -1;
        }
      }
      if (!std::isfinite(alpha)) {
        res.x = std::move(x);
        res.status = QPStatus::Unbounded;
        res.working_rows = working;
        res.bounds = std::move(bounds);
        return res;
      }
      x += alpha * p;
      at_subspace_minimum = block_row < 0 && block_var < 0;
      if (block_row >= 0) {
        working.push_back(static_cast<int>(block_row));
        in_working[block_row] = 1;
      } else if (block_var >= 0) {
        if (p(block_var) < 0.0) {
          x(block_var) = lb_(block_var);
          bounds[block_var] = Bound::Lower;
        } else {
          x(block_var) = ub_(block_var);
          bounds[block_var] = Bound::Upper;
        }
      }
    }
    res.x = std::move(x);
    res.status = QPStatus::MaxIter;
    res.working_rows = working;
    res.bounds = std::move(bounds);
    res.row_duals = VectorXd::Zero(static_cast<Index>(working.size()));
    return res;
  }

 private:
  // Minimizer of 1/2 p^T Hz p + gz^T p, or a zero-curvature descent direction
  // when gz has a component in the null space of Hz.
  static VectorXd reduced_step(const MatrixXd& Hz, const VectorXd& gz, double g_scale,
                               bool& zero_curvature_step) {
    zero_curvature_step = false;
    Eigen::LDLT<MatrixXd> ldlt(Hz);
    if (ldlt.info() == Eigen::Success) {
      const VectorXd d = ldlt.vectorD();
      const double d_max = d.maxCoeff();
      if (d_max > 0.0 && d.minCoeff() > kZeroCurvature * d_max) return -ldlt.solve(gz);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hz);
    const VectorXd& ev = es.eigenvalues();
    const MatrixXd& V = es.eigenvectors();
    const double ev_max = std::max(ev.maxCoeff(), 0.0);
    const double cutoff = kZeroCurvature * ev_max;
    VectorXd g_null = VectorXd::Zero(gz.size());
    VectorXd step = VectorXd::Zero(gz.size());
    for (Index i = 0; i < ev.size(); ++i) {
      const double c = V.col(i).dot(gz);
      if (ev(i) <= cutoff) {
        g_null += c * V.col(i);
      } else {
        step -= (c / ev(i)) * V.col(i);
      }
    }
    if (g_null.lpNorm<Eigen::Infinity>() > 1e-13 * g_scale) {
      zero_curvature_step = true;
      return -g_null;
    }
    return step;
  }

  const MatrixXd& H_;
  const VectorXd& f_;
  const MatrixXd& G_;
  const VectorXd& h_;
  const VectorXd& lb_;
  const VectorXd& ub_;
  Index n_;
  Index m_;
};

double max_violation(const DenseQP& qp, const VectorXd& x, const VectorXd& lb,
                     const VectorXd& ub) {
  double v = 0.0;
  if (qp.num_ineq() > 0) v = std::max(v, (qp.G * x - qp.h).maxCoeff());
  for (Index j = 0; j < x.size(); ++j) {
    v = std::max({v, lb(j) - x(j), x(j) - ub(j)});
  }
  return v;
}

double regularize_if_needed(const MatrixXd& H, MatrixXd& H_work) {
  if (H.size() == 0) return 0.0;
  Eigen::LLT<MatrixXd> llt(H);
  if (llt.info() == Eigen::Success) return 0.0;
  const double h_scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  const double ev_min = Eigen::SelfAdjointEigenSolver<MatrixXd>(H, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
  if (ev_min < -1e-9 * h_scale) {
    throw ValidationError("H", "not positive semidefinite (smallest eigenvalue " +
                                   std::to_string(ev_min) + ")");
  }
  if (ev_min >= 0.0) return 0.0;  // singular PSD: handled by zero-curvature steps
  const double shift = 1e-9 * h_scale;
  H_work.diagonal().array() += shift;
  return shift;
}

}  // namespace

std::string_view qp_status_name(QPStatus s) noexcept {
  switch (s) {
    case QPStatus::Optimal: return "optimal";
    case QPStatus::Infeasible: return "infeasible";
    case QPStatus::MaxIter: return "max_iter";
    case QPStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

void DenseQP::validate() const {
  const Index n = f.size();
  if (H.rows() != n || H.cols() != n) throw ValidationError("H", "must be n x n");
  if (G.cols() != n && G.rows() > 0) throw ValidationError("G", "must have n columns");
  if (G.rows() != h.size()) throw ValidationError("h", "length must match rows of G");
  if (!H.allFinite()) throw ValidationError("H", "entries must be finite");
  if (!f.allFinite()) throw ValidationError("f", "entries must be finite");
  if (!G.allFinite()) throw ValidationError("G", "entries must be finite");
  if (!h.allFinite()) throw ValidationError("h", "entries must be finite");
  if (n > 0) {
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw ValidationError("H", "must be symmetric");
    }
  }
  if (lb && lb->size() != n) throw ValidationError("lb", "length must be n");
  if (ub && ub->size() != n) throw ValidationError("ub", "length must be n");
  if (lb && ub) {
    for (Index j = 0; j < n; ++j) {
      if ((*lb)(j) > (*ub)(j)) {
        throw ValidationError("lb", "lb > ub at index " + std::to_string(j));
      }
    }
  }
  if (lb && (lb->array() == kInf).any()) throw ValidationError("lb", "cannot be +inf");
  if (ub && (ub->array() == -kInf).any()) throw ValidationError("ub", "cannot be -inf");
}

double qp_objective(const DenseQP& qp, const VectorXd& x) {
  return 0.5 * x.dot(qp.H * x) + qp.f.dot(x);
}

double kkt_residual(const DenseQP& qp, const VectorXd& x, const QPMultipliers& duals) {
  const Index n = qp.num_vars();
  const VectorXd lb = qp.lb.value_or(VectorXd::Constant(n, -kInf));
  const VectorXd ub = qp.ub.value_or(VectorXd::Constant(n, kInf));
  const VectorXd lower = duals.lower.size() == n ? duals.lower : VectorXd::Zero(n);
  const VectorXd upper = duals.upper.size() == n ? duals.upper : VectorXd::Zero(n);

  VectorXd stat = qp.H * x + qp.f + upper - lower;
  if (qp.num_ineq() > 0) stat += qp.G.transpose() * duals.ineq;
  double r = n > 0 ? stat.lpNorm<Eigen::Infinity>() : 0.0;

  r = std::max(r, max_violation(qp, x, lb, ub));
  for (Index i = 0; i < qp.num_ineq(); ++i) {
    const double lam = duals.ineq(i);
    r = std::max({r, -lam, std::abs(lam * (qp.G.row(i).dot(x) - qp.h(i)))});
  }
  for (Index j = 0; j < n; ++j) {
    r = std::max({r, -lower(j), -upper(j)});
    if (lower(j) != 0.0) r = std::max(r, std::abs(lower(j) * (x(j) - lb(j))));
    if (upper(j) != 0.0) r = std::max(r, std::abs(upper(j) * (ub(j) - x(j))));
  }
  return r;
}

double kkt_residual(const DenseQP& qp, const VectorXd& x, const VectorXd& ineq_duals) {
  QPMultipliers duals;
  duals.ineq = ineq_duals;
  return kkt_residual(qp, x, duals);
}

QPSolution solve_qp(const DenseQP& qp, const QPOptions& options) {
  qp.validate();
  const Index n = qp.num_vars();
  const Index m = qp.num_ineq();
  const VectorXd lb = qp.lb.value_or(VectorXd::Constant(n, -kInf));
  const VectorXd ub = qp.ub.value_or(VectorXd::Constant(n, kInf));
  const MatrixXd G = m > 0 ? qp.G : MatrixXd(0, n);

  QPSolution sol;
  MatrixXd H = qp.H;
  sol.regularization = regularize_if_needed(qp.H, H);

  const double feas_tol =
      1e-9 * std::max(1.0, m > 0 ? qp.h.lpNorm<Eigen::Infinity>() : 1.0);

  VectorXd x = options.x0.value_or(VectorXd::Zero(n));
  if (x.size() != n) throw ValidationError("x0", "length must be n");
  x = x.cwiseMax(lb).cwiseMin(ub);
  // Start in the interior of unbounded directions of the box.
  for (Index j = 0; j < n; ++j) {
    if (!std::isfinite(x(j))) x(j) = 0.0;
  }

  int iterations = 0;
  if (m > 0 && (G * x - qp.h).maxCoeff() > feas_tol) {
    // Phase 1: minimize t subject to G x - t <= h, t >= 0.
    MatrixXd H1 = MatrixXd::Zero(n + 1, n + 1);
    VectorXd f1 = VectorXd::Zero(n + 1);
    f1(n) = 1.0;
    MatrixXd G1(m, n + 1);
    G1.leftCols(n) = G;
    G1.col(n).setConstant(-1.0);
    VectorXd lb1(n + 1), ub1(n + 1);
    lb1 << lb, 0.0;
    ub1 << ub, kInf;
    VectorXd x1(n + 1);
    x1 << x, std::max(0.0, (G * x - qp.h).maxCoeff());
    ActiveSetEngine phase1(H1, f1, G1, qp.h, lb1, ub1);
    EngineResult r1 = phase1.run(x1, options.max_iter, iterations);
    if (r1.status == QPStatus::MaxIter) {
      sol.x = r1.x.head(n);
      sol.status = QPStatus::MaxIter;
      sol.iterations = iterations;
      sol.objective = qp_objective(qp, sol.x);
      sol.duals = {VectorXd::Zero(m), VectorXd::Zero(n), VectorXd::Zero(n)};
      sol.kkt_residual = kkt_residual(qp, sol.x, sol.duals);
      return sol;
    }
    if (r1.x(n) > feas_tol) {
      sol.x = r1.x.head(n);
      sol.status = QPStatus::Infeasible;
      sol.iterations = iterations;
      sol.objective = qp_objective(qp, sol.x);
      sol.duals = {VectorXd::Zero(m), VectorXd::Zero(n), VectorXd::Zero(n)};
      sol.kkt_residual = kkt_residual(qp, sol.x, sol.duals);
      return sol;
    }
    x = r1.x.head(n);
  }

  ActiveSetEngine engine(H, qp.f, G, qp.h, lb, ub);
  EngineResult r = engine.run(x, options.max_iter, iterations);

  sol.x = r.x;
  sol.iterations = iterations;
  sol.duals.ineq = VectorXd::Zero(m);
  sol.duals.lower = VectorXd::Zero(n);
  sol.duals.upper = VectorXd::Zero(n);
  for (std::size_t k = 0; k < r.working_rows.size(); ++k) {
    sol.duals.ineq(r.working_rows[k]) = r.row_duals(static_cast<Index>(k));
  }
  if (r.status == QPStatus::Optimal) {
    const VectorXd grad_l = H * r.x + qp.f + (m > 0 ? VectorXd(G.transpose() * sol.duals.ineq)
                                                    : VectorXd::Zero(n));
    for (Index j = 0; j < n; ++j) {
      if (r.bounds[j] == Bound::Lower) sol.duals.lower(j) = grad_l(j);
      if (r.bounds[j] == Bound::Upper) sol.duals.upper(j) = -grad_l(j);
    }
  }
  sol.active_rows = r.working_rows;
  std::sort(sol.active_rows.begin(), sol.active_rows.end());
  sol.objective = qp_objective(qp, sol.x);
  sol.kkt_residual = kkt_residual(qp, sol.x, sol.duals);
  sol.status = r.status;
  if (sol.status == QPStatus::Optimal && !(sol.kkt_residual <= options.tol_kkt)) {
    // Working-set optimality reached but the certificate is not tight enough.
    sol.status = QPStatus::MaxIter;
  }
  return sol;
}

}  // namespace ccscp
