#include "nilm/qp.hpp"

#include "nilm/number_io.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace nilm::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative threshold deciding that an entering normal lies in the span of
// the active normals (compared against ||d||^2, see solve()).
constexpr double kDependenceTol = 1e-22;

// R-diagonal threshold for rejecting a linearly dependent constraint at
// insertion time, relative to the largest diagonal seen so far.
constexpr double kPivotTol = 1e-11;

bool has_lower(const QpProblem& p) { return p.lower.size() > 0; }
bool has_upper(const QpProblem& p) { return p.upper.size() > 0; }

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

void validate(const QpProblem& p) {
  const Eigen::Index n = p.quad.rows();
  if (p.quad.cols() != n || p.linear.size() != n) {
    throw DimensionError("qp: objective dimensions inconsistent");
  }
  if (p.ineq_a.rows() != p.ineq_u.size() ||
      (p.ineq_a.rows() > 0 && p.ineq_a.cols() != n)) {
    throw DimensionError("qp: constraint dimensions inconsistent");
  }
  if ((has_lower(p) && p.lower.size() != n) ||
      (has_upper(p) && p.upper.size() != n)) {
    throw DimensionError("qp: bound dimensions inconsistent");
  }
  if (!p.quad.allFinite() || !p.linear.allFinite() || !p.ineq_a.allFinite() ||
      !p.ineq_u.allFinite()) {
    throw DataError("qp: non-finite problem data");
  }
  if ((p.quad - p.quad.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, p.quad.cwiseAbs().maxCoeff())) {
    throw DataError("qp: quadratic term not symmetric");
  }
  Eigen::LLT<Matrix> llt(p.quad);
  if (llt.info() != Eigen::Success) {
    throw DataError("qp: quadratic term not positive definite");
  }
}

StackedInequalities stack_inequalities(const QpProblem& p) {
  const Eigen::Index n = p.n_vars();
  Eigen::Index extra = 0;
  if (has_lower(p)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isfinite(p.lower[i])) ++extra;
    }
  }
  if (has_upper(p)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isfinite(p.upper[i])) ++extra;
    }
  }

  StackedInequalities out;
  out.a = Matrix::Zero(p.ineq_a.rows() + extra, n);
  out.u = Vector::Zero(p.ineq_a.rows() + extra);
  out.a.topRows(p.ineq_a.rows()) = p.ineq_a;
  out.u.head(p.ineq_u.size()) = p.ineq_u;

  Eigen::Index row = p.ineq_a.rows();
  if (has_lower(p)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(p.lower[i])) continue;
      out.a(row, i) = -1.0;
      out.u[row] = -p.lower[i];
      ++row;
    }
  }
  if (has_upper(p)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(p.upper[i])) continue;
      out.a(row, i) = 1.0;
      out.u[row] = p.upper[i];
      ++row;
    }
  }
  return out;
}

QpSolution solve(const QpProblem& p, double tol, int max_iter) {
  validate(p);
  const auto stacked = stack_inequalities(p);
  const Matrix& A = stacked.a;
  const Vector& U = stacked.u;
  const Eigen::Index n = p.n_vars();
  const Eigen::Index m = A.rows();
  if (max_iter <= 0) max_iter = static_cast<int>(10 * (n + m));

  Eigen::LLT<Matrix> llt(p.quad);

  QpSolution sol;
  sol.x = llt.solve(-p.linear);
  sol.duals = Vector::Zero(m);
  sol.status = SolveStatus::Optimal;

  // Dual active-set state. J starts as L^-T and is rotated so that its
  // leading q columns span L^-1 * (active normals); R holds the matching
  // upper-triangular QR factor.
  Matrix J = llt.matrixU().solve(Matrix::Identity(n, n));
  Matrix R = Matrix::Zero(n, n);
  double pivot_scale = 1.0;

  std::vector<Eigen::Index> active;
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);
  Vector dual_act = Vector::Zero(n);
  Eigen::Index q = 0;

  Vector d(n), z(n), r(n), np(n);

  auto add_constraint = [&](void) -> bool {
    // Concentrate d's tail into position q by Givens rotations, mirroring
    // each rotation onto the columns of J (J <- J * G^T keeps d = J^T np).
    for (Eigen::Index j = n - 1; j > q; --j) {
      const double h = std::hypot(d[j - 1], d[j]);
      if (h == 0.0) continue;
      const double cc = d[j - 1] / h;
      const double ss = d[j] / h;
      d[j - 1] = h;
      d[j] = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double a = J(k, j - 1);
        const double b = J(k, j);
        J(k, j - 1) = cc * a + ss * b;
        J(k, j) = -ss * a + cc * b;
      }
    }
    if (std::abs(d[q]) <= kPivotTol * pivot_scale) {
      return false;  // numerically dependent on the active normals
    }
    pivot_scale = std::max(pivot_scale, std::abs(d[q]));
    R.col(q).head(q + 1) = d.head(q + 1);
    ++q;
    return true;
  };

  auto drop_constraint = [&](Eigen::Index l) {
    is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(l)])] = 0;
    active.erase(active.begin() + l);
    for (Eigen::Index k = l; k + 1 < q; ++k) {
      dual_act[k] = dual_act[k + 1];
      R.col(k) = R.col(k + 1);
    }
    dual_act[q - 1] = 0.0;
    R.col(q - 1).setZero();
    --q;
    // R now has one subdiagonal entry per shifted column; chase it away.
    for (Eigen::Index j = l; j < q; ++j) {
      const double h = std::hypot(R(j, j), R(j + 1, j));
      if (h == 0.0) continue;
      const double cc = R(j, j) / h;
      const double ss = R(j + 1, j) / h;
      for (Eigen::Index col = j; col < q; ++col) {
        const double a = R(j, col);
        const double b = R(j + 1, col);
        R(j, col) = cc * a + ss * b;
        R(j + 1, col) = -ss * a + cc * b;
      }
      R(j + 1, j) = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double a = J(k, j);
        const double b = J(k, j + 1);
        J(k, j) = cc * a + ss * b;
        J(k, j + 1) = -ss * a + cc * b;
      }
    }
  };

  int iters = 0;
  while (true) {
    // Most violated inactive constraint enters; ties at equal violation
    // resolve to the lowest index.
    Eigen::Index entering = -1;
    double worst = tol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = A.row(i).dot(sol.x) - U[i];
      if (s > worst) {
        worst = s;
        entering = i;
      }
    }
    if (entering < 0) break;  // primal feasible within tol: optimal

    np = A.row(entering).transpose();
    double entering_dual = 0.0;

    while (true) {
      if (++iters > max_iter) {
        sol.status = SolveStatus::IterationLimit;
        break;
      }

      d.noalias() = J.transpose() * np;
      z.noalias() = J.rightCols(n - q) * d.tail(n - q);
      if (q > 0) {
        r.head(q) = R.topLeftCorner(q, q)
                        .template triangularView<Eigen::Upper>()
                        .solve(d.head(q));
      }

      // Longest dual step that keeps active multipliers non-negative.
      double t1 = kInf;
      Eigen::Index drop = -1;
      for (Eigen::Index k = 0; k < q; ++k) {
        if (r[k] > 0.0) {
          const double step = dual_act[k] / r[k];
          if (step < t1) {
            t1 = step;
            drop = k;
          }
        }
      }

      const double zdotn = z.dot(np);
      const bool z_usable = zdotn > kDependenceTol * d.squaredNorm();
      const double violation = A.row(entering).dot(sol.x) - U[entering];
      const double t2 = z_usable ? violation / zdotn : kInf;

      const double t = std::min(t1, t2);
      if (t == kInf) {
        sol.status = SolveStatus::Infeasible;
        break;
      }

      if (!z_usable) {
        // Dual-only step: transfer multiplier mass and drop the blocker.
        dual_act.head(q) -= t * r.head(q);
        entering_dual += t;
        drop_constraint(drop);
        continue;
      }

      sol.x -= t * z;
      dual_act.head(q) -= t * r.head(q);
      entering_dual += t;

      if (t == t2) {
        // Full step: the entering constraint becomes active (unless it is
        // numerically dependent, in which case it is now satisfied anyway).
        if (add_constraint()) {
          dual_act[q - 1] = entering_dual;
          active.push_back(entering);
          is_active[static_cast<std::size_t>(entering)] = 1;
        }
        break;
      }
      drop_constraint(drop);
    }
    if (sol.status != SolveStatus::Optimal) break;
  }

  for (Eigen::Index k = 0; k < q; ++k) {
    sol.duals[active[static_cast<std::size_t>(k)]] = std::max(0.0, dual_act[k]);
  }
  sol.iterations = iters;
  sol.objective = 0.5 * sol.x.dot(p.quad * sol.x) + p.linear.dot(sol.x);
  sol.kkt_residual = kkt_check(p, sol);
  return sol;
}

double kkt_check(const QpProblem& p, const QpSolution& s) {
  const auto stacked = stack_inequalities(p);
  const Matrix& A = stacked.a;
  const Vector& U = stacked.u;
  if (s.x.size() != p.n_vars() || s.duals.size() != A.rows()) {
    throw DimensionError("qp::kkt_check: solution shape mismatch");
  }

  Vector grad = p.quad * s.x + p.linear;
  double primal = 0.0;
  double dual_neg = 0.0;
  double complementarity = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double slack = A.row(i).dot(s.x) - U[i];
    primal = std::max(primal, slack);
    dual_neg = std::max(dual_neg, -s.duals[i]);
    complementarity = std::max(complementarity, std::abs(s.duals[i] * slack));
    grad += s.duals[i] * A.row(i).transpose();
  }
  const double stationarity = grad.cwiseAbs().maxCoeff();
  return std::max({primal, dual_neg, complementarity, stationarity});
}

void write_debug(std::ostream& os, const QpProblem& p) {
  const Eigen::Index n = p.n_vars();
  const Eigen::Index m = p.ineq_a.rows();
  os << "qp " << n << ' ' << m << ' ' << (has_lower(p) ? 1 : 0) << ' '
     << (has_upper(p) ? 1 : 0) << '\n';
  auto emit_row = [&os](const auto& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (j) os << ' ';
      os << format_double(row[j]);
    }
    os << '\n';
  };
  for (Eigen::Index i = 0; i < n; ++i) emit_row(p.quad.row(i));
  emit_row(p.linear);
  for (Eigen::Index i = 0; i < m; ++i) emit_row(p.ineq_a.row(i));
  emit_row(p.ineq_u);
  if (has_lower(p)) emit_row(p.lower);
  if (has_upper(p)) emit_row(p.upper);
}

QpProblem read_debug(std::istream& is) {
  std::string tag;
  Eigen::Index n = 0, m = 0;
  int has_lo = 0, has_hi = 0;
  if (!(is >> tag >> n >> m >> has_lo >> has_hi) || tag != "qp") {
    throw DataError("qp debug format: bad header");
  }
  auto read_row = [&is](Eigen::Index count) {
    Vector row(count);
    for (Eigen::Index j = 0; j < count; ++j) {
      std::string tok;
      if (!(is >> tok)) throw DataError("qp debug format: truncated");
      row[j] = parse_double(tok);
    }
    return row;
  };
  QpProblem p;
  p.quad = Matrix(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p.quad.row(i) = read_row(n).transpose();
  p.linear = read_row(n);
  p.ineq_a = Matrix(m, n);
  for (Eigen::Index i = 0; i < m; ++i) p.ineq_a.row(i) = read_row(n).transpose();
  p.ineq_u = read_row(m);
  if (has_lo) p.lower = read_row(n);
  if (has_hi) p.upper = read_row(n);
  return p;
}

}  // namespace nilm::qp
