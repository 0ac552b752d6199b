#pragma once

#include "nilm/core.hpp"
#include "nilm/qp.hpp"

#include <optional>

namespace nilm::model {

/// Per-period parameters of the semi-parametric consumer model.
/// Fixed load:      x^f_k = p_k + q_k * theta_k
/// Shiftable load:  x^s_k = a_k / c_k + b_k + d_k * theta_k
/// Utility:         u = sum_k a_k log((x^s_k - (b_k + d_k theta_k))_+ + 1)
struct UtilityParams {
  Vector a;  ///< elasticity, dimensionless, >= 0
  Vector b;  ///< base shiftable load per period
  Vector d;  ///< shiftable temperature coefficient
  Vector p;  ///< base fixed load per period
  Vector q;  ///< fixed-load temperature coefficient

  Eigen::Index n_periods() const { return a.size(); }
};

void validate(const UtilityParams& params);

struct FitConfig {
  /// epsilon-insensitive tolerance bounds; unset means 5% of the mean
  /// period load of the respective component.
  std::optional<double> eps_f;
  std::optional<double> eps_s;
  double w_f = 1.0;  ///< slack loss weights (enter the loss squared)
  double w_s = 1.0;
  double gamma_p = 1e-4;  ///< regularization coefficients (enter squared)
  double gamma_q = 1e-4;
  double gamma_a = 1e-4;
  double gamma_b = 1e-4;
  double gamma_d = 1e-4;
  bool bound_a = true;  ///< enforce a >= 0
  bool bound_b = false;
  bool bound_d = false;
  bool bound_p = false;
  bool bound_q = false;
  bool pin_q_to_zero = true;  ///< fix q = 0 (fixed loads usually temperature-flat)
  double solver_tol = 1e-6;
  int solver_max_iter = 0;  ///< <= 0: solver default
};

void validate(const FitConfig& cfg);

struct FitResult {
  UtilityParams params;
  Vector slack_fixed;      ///< xi^f, >= 0
  Vector slack_shiftable;  ///< xi^s, >= 0
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  qp::SolveStatus status = qp::SolveStatus::Optimal;
  double eps_f_used = 0.0;
  double eps_s_used = 0.0;
  /// Vector medians in Table-layout order a, b, d, p, q.
  Vector medians;
};

/// x^f_k = p_k + q_k theta_k.
Vector predict_fixed(const UtilityParams& params, const Vector& theta);

/// x^s_k = a_k / c_k + b_k + d_k theta_k.
Vector predict_shiftable(const UtilityParams& params, const Vector& theta,
                         const CostVector& cost);

/// Clamped log-Cobb-Douglas utility of a period consumption vector.
double utility(const UtilityParams& params, const Vector& xs, const Vector& theta);

/// The assembled epsilon-insensitive LICQP together with the layout
/// bookkeeping needed to read the solution back.
struct AssembledQp {
  qp::QpProblem problem;
  Eigen::Index n_periods = 0;
  bool pinned_q = false;
  double eps_f = 0.0;
  double eps_s = 0.0;
};

/// Builds the QP over the decision vector [p; q; a; b; d; xi^f; xi^s]
/// (7|K| variables). For every day and period the absolute model-vs-data
/// tolerance constraints expand into two linear inequalities each; the
/// slacks carry lower bounds of zero. With pin_q_to_zero the q block keeps
/// its regularization but is removed from every constraint, so its optimum
/// is exactly zero.
AssembledQp assemble_qp(const Matrix& xs_periods, const Matrix& xf_periods,
                        const TemperatureMatrix& theta, const CostVector& cost,
                        const FitConfig& cfg);

/// Period-sums the component load matrices, assembles and solves the QP,
/// and unpacks parameters, slacks and medians. Works identically on ground
/// truth components and on disaggregated estimates.
FitResult fit(const LoadMatrix& shiftable, const LoadMatrix& fixed,
              const TemperatureMatrix& theta, const CostVector& cost,
              const FitConfig& cfg, const TimeGrid& grid);

}  // namespace nilm::model
