#pragma once

#include "nilm/core.hpp"
#include "nilm/gmm.hpp"
#include "nilm/nmf.hpp"

#include <cstdint>
#include <vector>

namespace nilm::disagg {

struct HybridConfig {
  int max_iters = 25;
  double rel_tol = 1e-4;     ///< relative Frobenius change of the estimate
  int n_gaussians = 4;       ///< |G|, nonzero mixture components
  int n_bases = 5;           ///< |B|, NMF rank
  std::uint64_t seed = 1;
  double variance_floor = 1e-6;
  int em_cycles_per_iter = 1;
  double drift_bound = 0.1;  ///< basis renormalization trigger
};

void validate(const HybridConfig& cfg);

struct IterationDiag {
  int iteration = 0;
  double phi = 0.0;      ///< NMF reconstruction objective after the updates
  double loglik = 0.0;   ///< GMM log-likelihood of its current input
  double drift = 0.0;    ///< ||W'W - I||_F after the updates
  double rel_change = 0.0;
};

struct DisaggResult {
  LoadMatrix shiftable;       ///< GMM level extraction from the total load
  LoadMatrix fixed;           ///< NMF reconstruction W * H
  LoadMatrix total_estimate;  ///< shiftable + fixed, exact
  gmm::GmmState state;
  nmf::NmfFactors factors;
  int iterations_run = 0;
  double residual_norm = 0.0;     ///< ||X - estimate||_F
  double mass_ratio_error = 0.0;  ///< |sum estimate - sum X| / sum X
  double clamped_mass = 0.0;      ///< negative mass clamped at module boundaries
  int renormalizations = 0;       ///< drift fallbacks taken
  std::vector<IterationDiag> trace;
};

/// Alternating GMM-EM / NMF disaggregation of a total load matrix.
///
/// Per iteration: one EM cycle on the current shiftable residual, level
/// extraction from the total load, the fixed complement, one H and one W
/// multiplicative update toward it, and a fresh shiftable residual
/// X - W*H which becomes the next EM input. Stops when the estimate's
/// relative change drops below rel_tol or after max_iters.
DisaggResult run_hybrid(const LoadMatrix& x, const HybridConfig& cfg);

/// Diagnostic residual X - (shiftable + fixed); deliberately unclamped.
Matrix residual_noise(const LoadMatrix& x, const DisaggResult& r);

}  // namespace nilm::disagg
