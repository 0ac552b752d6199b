#pragma once

#include "nilm/core.hpp"

namespace nilm::gmm {

/// Univariate Gaussian mixture over instantaneous shiftable load levels.
/// Component 0 is the OFF state: its mean is pinned at zero and only its
/// prior and variance are learned. Components 1..n-1 track the discrete
/// power levels of shiftable appliances.
struct GmmState {
  Vector priors;     ///< pi_j, sums to 1
  Vector means;      ///< mu_j (kW), means[0] == 0 always
  Vector variances;  ///< sigma_j^2 (kW^2), floored at variance_floor
  double variance_floor = 1e-6;

  Eigen::Index n_components() const { return priors.size(); }
};

/// Throws DataError / ConfigError when a GmmState invariant is broken.
void validate(const GmmState& state);

/// Posterior probabilities z(j, t + T*n) of component j for sample x_t(n).
/// Each column is a probability vector (sums to 1).
struct Responsibilities {
  Matrix z;  ///< n_components x (|T|*|N|)
};

/// Deterministic data-driven initialization: nonzero means at evenly spaced
/// quantiles of the entries above the sample median, uniform priors, and
/// variances at sample variance / n_components (floored).
GmmState init_state(const LoadMatrix& x, int n_gaussians, double variance_floor);

/// E-step: full-density posteriors z_{j,t}(n) over all components,
/// normalized per sample.
Responsibilities e_step(const GmmState& state, const LoadMatrix& x);

/// M-step: responsibility-weighted priors, means and variances; the mean of
/// component 0 stays pinned at zero and variances are floored. A component
/// whose total responsibility falls below 1e-8 * |T| * |N| is collapsed:
/// its prior is zeroed (and priors renormalized) and it stops participating
/// in extract_shiftable.
GmmState m_step(const Responsibilities& z, const LoadMatrix& x,
                const GmmState& previous);

/// Total log-likelihood of the data under the mixture (compensated sum).
double log_likelihood(const GmmState& state, const LoadMatrix& x);

/// Level extraction: for every sample the estimated shiftable load is the
/// largest live nonzero-component mean that does not exceed the sample, or
/// zero when all of them do.
LoadMatrix extract_shiftable(const GmmState& state, const LoadMatrix& x);

}  // namespace nilm::gmm
