#include "nilm/disagg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nilm::disagg {

namespace {

/// Coarse first split: per day, entries above the 75th percentile are
/// treated as shiftable with the day's median removed; the rest is fixed.
Matrix initial_shiftable(const Matrix& x) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  std::vector<double> col(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index n = 0; n < x.cols(); ++n) {
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      col[static_cast<std::size_t>(t)] = x(t, n);
    }
    std::sort(col.begin(), col.end());
    const double p75 = quantile_sorted(col, 0.75);
    const double med = quantile_sorted(col, 0.5);
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      if (x(t, n) > p75) {
        out(t, n) = std::max(x(t, n) - med, 0.0);
      }
    }
  }
  return out;
}

}  // namespace

void validate(const HybridConfig& cfg) {
  if (cfg.max_iters < 1) throw ConfigError("HybridConfig: max_iters must be >= 1");
  if (cfg.rel_tol <= 0.0) throw ConfigError("HybridConfig: rel_tol must be > 0");
  if (cfg.n_gaussians < 1) throw ConfigError("HybridConfig: need >= 1 Gaussian");
  if (cfg.n_bases < 1) throw ConfigError("HybridConfig: need >= 1 basis");
  if (cfg.variance_floor <= 0.0) {
    throw ConfigError("HybridConfig: variance floor must be > 0");
  }
  if (cfg.em_cycles_per_iter < 1) {
    throw ConfigError("HybridConfig: need >= 1 EM cycle per iteration");
  }
  if (cfg.drift_bound <= 0.0) {
    throw ConfigError("HybridConfig: drift bound must be > 0");
  }
}

DisaggResult run_hybrid(const LoadMatrix& x, const HybridConfig& cfg) {
  validate(cfg);
  if (!x.values.allFinite()) throw DataError("run_hybrid: non-finite input");
  if (x.values.size() == 0) throw DataError("run_hybrid: empty input");
  if (x.values.minCoeff() < 0.0) throw DataError("run_hybrid: negative input");
  if (cfg.n_bases >= x.values.rows()) {
    throw ConfigError("run_hybrid: n_bases must be < |T|");
  }

  DisaggResult result;

  // Steps 1-3: coarse split, then GMM on its shiftable part and NMF
  // factors on its fixed complement.
  LoadMatrix em_input{initial_shiftable(x.values), LoadRole::ShiftableEstimate};
  LoadMatrix fixed_init{x.values - em_input.values, LoadRole::FixedEstimate};
  result.clamped_mass += clamp_nonnegative(fixed_init.values);

  gmm::GmmState state =
      gmm::init_state(em_input, cfg.n_gaussians, cfg.variance_floor);
  nmf::NmfFactors factors =
      nmf::init_factors(fixed_init, cfg.n_bases, cfg.seed);

  Matrix previous_estimate = em_input.values + fixed_init.values;
  Matrix shiftable_est, reconstruction;
  const double norm_floor = 1e-12;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    // 4a-4b: EM on the current shiftable residual.
    for (int cycle = 0; cycle < cfg.em_cycles_per_iter; ++cycle) {
      const gmm::Responsibilities resp = gmm::e_step(state, em_input);
      state = gmm::m_step(resp, em_input, state);
    }
    const double loglik = gmm::log_likelihood(state, em_input);

    // 4c: level extraction from the total load and its fixed complement.
    shiftable_est = gmm::extract_shiftable(state, x).values;
    LoadMatrix fixed_target{x.values - shiftable_est, LoadRole::FixedEstimate};
    result.clamped_mass += clamp_nonnegative(fixed_target.values);

    // 4d-4e: one multiplicative step of each factor toward the new target.
    factors = nmf::update_coeffs(factors, fixed_target);
    factors = nmf::update_basis(factors, fixed_target);
    double drift = nmf::orthonormality_drift(factors);
    if (drift > cfg.drift_bound) {
      nmf::renormalize_columns(factors);
      ++result.renormalizations;
      drift = nmf::orthonormality_drift(factors);
    }
    const double phi = nmf::reconstruction_error(factors, fixed_target);

    // 4f: fresh shiftable residual, which feeds the next EM round.
    reconstruction = factors.basis * factors.coeffs;
    Matrix residual = x.values - reconstruction;
    result.clamped_mass += clamp_nonnegative(residual);
    em_input.values = std::move(residual);

    const Matrix estimate = shiftable_est + reconstruction;
    const double rel = (estimate - previous_estimate).norm() /
                       std::max(previous_estimate.norm(), norm_floor);
    result.trace.push_back({iter, phi, loglik, drift, rel});
    previous_estimate = estimate;
    result.iterations_run = iter;
    if (rel < cfg.rel_tol) break;
  }

  result.shiftable = LoadMatrix{std::move(shiftable_est), LoadRole::ShiftableEstimate};
  result.fixed = LoadMatrix{reconstruction, LoadRole::FixedEstimate};
  result.total_estimate =
      LoadMatrix{result.shiftable.values + result.fixed.values, LoadRole::Total};
  result.state = std::move(state);
  result.factors = std::move(factors);
  result.residual_norm = (x.values - result.total_estimate.values).norm();
  const double total_in = x.values.sum();
  result.mass_ratio_error =
      total_in > 0.0
          ? std::abs(result.total_estimate.values.sum() - total_in) / total_in
          : 0.0;
  return result;
}

Matrix residual_noise(const LoadMatrix& x, const DisaggResult& r) {
  if (x.values.rows() != r.total_estimate.values.rows() ||
      x.values.cols() != r.total_estimate.values.cols()) {
    throw DimensionError("residual_noise: shape mismatch");
  }
  return x.values - r.total_estimate.values;
}

}  // namespace nilm::disagg
