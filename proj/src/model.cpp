#include "nilm/model.hpp"

#include <cmath>
#include <limits>

namespace nilm::model {

namespace {

enum Block { kP = 0, kQ = 1, kA = 2, kB = 3, kD = 4, kXiF = 5, kXiS = 6 };

Eigen::Index block_start(Block b, Eigen::Index periods) {
  return static_cast<Eigen::Index>(b) * periods;
}

}  // namespace

void validate(const UtilityParams& params) {
  const auto k = params.n_periods();
  if (params.b.size() != k || params.d.size() != k || params.p.size() != k ||
      params.q.size() != k) {
    throw DimensionError("UtilityParams: vectors must share |K|");
  }
  for (const Vector* v : {&params.a, &params.b, &params.d, &params.p, &params.q}) {
    if (!v->allFinite()) throw DataError("UtilityParams: non-finite entry");
  }
  if (k > 0 && params.a.minCoeff() < 0.0) {
    throw DataError("UtilityParams: elasticity a must be >= 0");
  }
}

void validate(const FitConfig& cfg) {
  if ((cfg.eps_f && *cfg.eps_f < 0.0) || (cfg.eps_s && *cfg.eps_s < 0.0)) {
    throw ConfigError("FitConfig: epsilon bounds must be >= 0");
  }
  if (cfg.w_f <= 0.0 || cfg.w_s <= 0.0) {
    throw ConfigError("FitConfig: slack weights must be > 0");
  }
  for (double g : {cfg.gamma_p, cfg.gamma_q, cfg.gamma_a, cfg.gamma_b, cfg.gamma_d}) {
    if (g <= 0.0) throw ConfigError("FitConfig: regularization must be > 0");
  }
  if (cfg.solver_tol <= 0.0) {
    throw ConfigError("FitConfig: solver tolerance must be > 0");
  }
}

Vector predict_fixed(const UtilityParams& params, const Vector& theta) {
  if (theta.size() != params.n_periods()) {
    throw DimensionError("predict_fixed: theta length mismatch");
  }
  return params.p.array() + params.q.array() * theta.array();
}

Vector predict_shiftable(const UtilityParams& params, const Vector& theta,
                         const CostVector& cost) {
  if (theta.size() != params.n_periods() ||
      cost.values.size() != params.n_periods()) {
    throw DimensionError("predict_shiftable: dimension mismatch");
  }
  validate(cost);
  return params.a.array() / cost.values.array() + params.b.array() +
         params.d.array() * theta.array();
}

double utility(const UtilityParams& params, const Vector& xs, const Vector& theta) {
  if (xs.size() != params.n_periods() || theta.size() != params.n_periods()) {
    throw DimensionError("utility: dimension mismatch");
  }
  if (xs.size() > 0 && xs.minCoeff() < 0.0) {
    throw DataError("utility: consumption must be >= 0");
  }
  double u = 0.0;
  for (Eigen::Index k = 0; k < xs.size(); ++k) {
    const double excess = xs[k] - (params.b[k] + params.d[k] * theta[k]);
    u += params.a[k] * std::log(std::max(excess, 0.0) + 1.0);
  }
  return u;
}

AssembledQp assemble_qp(const Matrix& xs_periods, const Matrix& xf_periods,
                        const TemperatureMatrix& theta, const CostVector& cost,
                        const FitConfig& cfg) {
  validate(cfg);
  validate(cost);
  validate(theta);
  const Eigen::Index K = xs_periods.rows();
  const Eigen::Index N = xs_periods.cols();
  if (xf_periods.rows() != K || xf_periods.cols() != N ||
      theta.values.rows() != K || theta.values.cols() != N ||
      cost.values.size() != K) {
    throw DimensionError("assemble_qp: period-sum dimension mismatch");
  }

  AssembledQp out;
  out.n_periods = K;
  out.pinned_q = cfg.pin_q_to_zero;
  // Unset tolerances default to 5% of the mean period load, per component.
  out.eps_f = cfg.eps_f ? *cfg.eps_f : (N > 0 ? 0.05 * xf_periods.mean() : 0.0);
  out.eps_s = cfg.eps_s ? *cfg.eps_s : (N > 0 ? 0.05 * xs_periods.mean() : 0.0);

  const Eigen::Index n = 7 * K;
  qp::QpProblem& p = out.problem;

  // Objective L + R as 1/2 x' Q x with Q twice the squared coefficients.
  Vector diag(n);
  diag.segment(block_start(kP, K), K).setConstant(2.0 * cfg.gamma_p * cfg.gamma_p);
  diag.segment(block_start(kQ, K), K).setConstant(2.0 * cfg.gamma_q * cfg.gamma_q);
  diag.segment(block_start(kA, K), K).setConstant(2.0 * cfg.gamma_a * cfg.gamma_a);
  diag.segment(block_start(kB, K), K).setConstant(2.0 * cfg.gamma_b * cfg.gamma_b);
  diag.segment(block_start(kD, K), K).setConstant(2.0 * cfg.gamma_d * cfg.gamma_d);
  diag.segment(block_start(kXiF, K), K).setConstant(2.0 * cfg.w_f * cfg.w_f);
  diag.segment(block_start(kXiS, K), K).setConstant(2.0 * cfg.w_s * cfg.w_s);
  p.quad = diag.asDiagonal();
  p.linear = Vector::Zero(n);

  // Two-sided expansion of |model - data| <= eps + xi, four rows per
  // (day, period): fixed+, fixed-, shiftable+, shiftable-.
  const Eigen::Index rows = 4 * K * N;
  p.ineq_a = Matrix::Zero(rows, n);
  p.ineq_u = Vector::Zero(rows);
  Eigen::Index row = 0;
  for (Eigen::Index nn = 0; nn < N; ++nn) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double th = theta.values(k, nn);
      const double inv_c = 1.0 / cost.values[k];
      const double yf = xf_periods(k, nn);
      const double ys = xs_periods(k, nn);

      p.ineq_a(row, block_start(kP, K) + k) = 1.0;
      if (!cfg.pin_q_to_zero) p.ineq_a(row, block_start(kQ, K) + k) = th;
      p.ineq_a(row, block_start(kXiF, K) + k) = -1.0;
      p.ineq_u[row] = out.eps_f + yf;
      ++row;

      p.ineq_a(row, block_start(kP, K) + k) = -1.0;
      if (!cfg.pin_q_to_zero) p.ineq_a(row, block_start(kQ, K) + k) = -th;
      p.ineq_a(row, block_start(kXiF, K) + k) = -1.0;
      p.ineq_u[row] = out.eps_f - yf;
      ++row;

      p.ineq_a(row, block_start(kA, K) + k) = inv_c;
      p.ineq_a(row, block_start(kB, K) + k) = 1.0;
      p.ineq_a(row, block_start(kD, K) + k) = th;
      p.ineq_a(row, block_start(kXiS, K) + k) = -1.0;
      p.ineq_u[row] = out.eps_s + ys;
      ++row;

      p.ineq_a(row, block_start(kA, K) + k) = -inv_c;
      p.ineq_a(row, block_start(kB, K) + k) = -1.0;
      p.ineq_a(row, block_start(kD, K) + k) = -th;
      p.ineq_a(row, block_start(kXiS, K) + k) = -1.0;
      p.ineq_u[row] = out.eps_s - ys;
      ++row;
    }
  }

  p.lower = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  p.lower.segment(block_start(kXiF, K), 2 * K).setZero();
  if (cfg.bound_a) p.lower.segment(block_start(kA, K), K).setZero();
  if (cfg.bound_b) p.lower.segment(block_start(kB, K), K).setZero();
  if (cfg.bound_d) p.lower.segment(block_start(kD, K), K).setZero();
  if (cfg.bound_p) p.lower.segment(block_start(kP, K), K).setZero();
  if (cfg.bound_q && !cfg.pin_q_to_zero) {
    p.lower.segment(block_start(kQ, K), K).setZero();
  }
  return out;
}

FitResult fit(const LoadMatrix& shiftable, const LoadMatrix& fixed,
              const TemperatureMatrix& theta, const CostVector& cost,
              const FitConfig& cfg, const TimeGrid& grid) {
  validate(shiftable);
  validate(fixed);
  if (shiftable.values.rows() != grid.instants_per_day() ||
      fixed.values.rows() != grid.instants_per_day() ||
      shiftable.values.cols() != fixed.values.cols()) {
    throw DimensionError("fit: load matrices inconsistent with grid");
  }

  const Matrix xs_periods = sum_to_periods(shiftable.values, grid);
  const Matrix xf_periods = sum_to_periods(fixed.values, grid);
  AssembledQp assembled = assemble_qp(xs_periods, xf_periods, theta, cost, cfg);

  const qp::QpSolution sol =
      qp::solve(assembled.problem, cfg.solver_tol, cfg.solver_max_iter);

  const Eigen::Index K = assembled.n_periods;
  FitResult result;
  result.params.p = sol.x.segment(block_start(kP, K), K);
  result.params.q = sol.x.segment(block_start(kQ, K), K);
  result.params.a = sol.x.segment(block_start(kA, K), K);
  result.params.b = sol.x.segment(block_start(kB, K), K);
  result.params.d = sol.x.segment(block_start(kD, K), K);
  result.slack_fixed = sol.x.segment(block_start(kXiF, K), K);
  result.slack_shiftable = sol.x.segment(block_start(kXiS, K), K);
  if (assembled.pinned_q) {
    // No constraint or linear term touches q, so its exact optimum is 0.
    result.params.q.setZero();
  }
  if (cfg.bound_a) {
    // Active bound rows hold a_k at 0 up to rounding; make the sign exact.
    result.params.a = result.params.a.cwiseMax(0.0);
  }
  result.objective = sol.objective;
  result.kkt_residual = sol.kkt_residual;
  result.iterations = sol.iterations;
  result.status = sol.status;
  result.eps_f_used = assembled.eps_f;
  result.eps_s_used = assembled.eps_s;
  result.medians.resize(5);
  result.medians << median(result.params.a), median(result.params.b),
      median(result.params.d), median(result.params.p), median(result.params.q);
  return result;
}

}  // namespace nilm::model
