#pragma once

#include "nilm/core.hpp"

#include <iosfwd>

namespace nilm::qp {

/// Strictly convex quadratic program
///
///   minimize    1/2 x' Q x + c' x
///   subject to  A x <= u
///               lower <= x <= upper   (either side optional)
///
/// Q must be symmetric positive definite. Bounds use +-infinity for absent
/// sides; empty bound vectors mean "no bounds at all".
struct QpProblem {
  Matrix quad;    ///< Q, n x n
  Vector linear;  ///< c, n
  Matrix ineq_a;  ///< A, m x n (0 x n allowed)
  Vector ineq_u;  ///< u, m
  Vector lower;   ///< n or empty
  Vector upper;   ///< n or empty

  Eigen::Index n_vars() const { return quad.rows(); }
};

/// Throws unless shapes are consistent and Q admits a Cholesky factorization.
void validate(const QpProblem& p);

/// Canonical single-matrix form of all inequalities: the rows of A first,
/// then -x_i <= -lower_i for each finite lower bound (ascending i), then
/// x_i <= upper_i likewise. Solver duals and kkt_check both index
/// constraints in this order.
struct StackedInequalities {
  Matrix a;
  Vector u;
};
StackedInequalities stack_inequalities(const QpProblem& p);

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

const char* to_string(SolveStatus s);

struct QpSolution {
  Vector x;
  Vector duals;  ///< one multiplier per stacked inequality, >= 0
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::Optimal;
};

/// Dual active-set solver (Goldfarb-Idnani): starts at the unconstrained
/// minimum and adds violated constraints one at a time, maintaining a
/// Cholesky factor of Q and a QR factorization of the active-constraint
/// normals. No feasible starting point is needed. Deterministic: the most
/// violated constraint enters first, ties broken by lowest index.
///
/// max_iter <= 0 selects the default 10 * (n + m).
QpSolution solve(const QpProblem& p, double tol = 1e-6, int max_iter = 0);

/// Independent first-principles KKT residual of (p, s): the maximum of
/// primal violation, dual negativity, stationarity inf-norm
/// ||Q x + c + A' lambda|| and complementarity |lambda_i (A_i x - u_i)|.
/// Uses nothing from the solver beyond the returned point and multipliers.
double kkt_check(const QpProblem& p, const QpSolution& s);

/// Plain-text round-trip for repro reports. Numbers are written in
/// shortest-round-trip form, so read(write(p)) reproduces p exactly.
void write_debug(std::ostream& os, const QpProblem& p);
QpProblem read_debug(std::istream& is);

}  // namespace nilm::qp
