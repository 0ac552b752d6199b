#include "nilm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nilm::gmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kCollapseFraction = 1e-8;

double log_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + d * d / variance);
}

void check_input(const LoadMatrix& x) {
  if (!x.values.allFinite()) {
    throw DataError("gmm: non-finite load entry");
  }
  if (x.values.size() == 0) {
    throw DataError("gmm: empty load matrix");
  }
  if (x.values.minCoeff() < 0.0) {
    throw DataError("gmm: negative load entry");
  }
}

}  // namespace

void validate(const GmmState& state) {
  const auto n = state.n_components();
  if (n < 1 || state.means.size() != n || state.variances.size() != n) {
    throw ConfigError("GmmState: inconsistent component count");
  }
  if (state.variance_floor <= 0.0) {
    throw ConfigError("GmmState: variance floor must be > 0");
  }
  if (state.priors.minCoeff() < 0.0 ||
      std::abs(state.priors.sum() - 1.0) > 1e-9) {
    throw DataError("GmmState: priors must be a probability vector");
  }
  if (state.means[0] != 0.0) {
    throw DataError("GmmState: mean of component 0 must be 0");
  }
  if (state.means.minCoeff() < 0.0) {
    throw DataError("GmmState: negative component mean");
  }
  if (state.variances.minCoeff() < state.variance_floor) {
    throw DataError("GmmState: variance below floor");
  }
}

GmmState init_state(const LoadMatrix& x, int n_gaussians, double variance_floor) {
  if (n_gaussians < 1) {
    throw ConfigError("gmm: need at least one nonzero component");
  }
  if (variance_floor <= 0.0) {
    throw ConfigError("gmm: variance floor must be > 0");
  }
  check_input(x);

  std::vector<double> all(x.values.data(), x.values.data() + x.values.size());
  std::sort(all.begin(), all.end());
  const double med = quantile_sorted(all, 0.5);

  // Seed the nonzero means from the upper half of the sample so they start
  // near the appliance levels rather than inside the OFF cluster.
  std::vector<double> upper;
  upper.reserve(all.size() / 2 + 1);
  for (double v : all) {
    if (v > med) upper.push_back(v);
  }

  const int n = n_gaussians + 1;
  GmmState state;
  state.variance_floor = variance_floor;
  state.priors = Vector::Constant(n, 1.0 / n);
  state.means = Vector::Zero(n);
  state.variances = Vector::Zero(n);

  for (int j = 1; j < n; ++j) {
    if (upper.empty()) {
      state.means[j] = 0.0;
    } else {
      const double level = (j - 0.5) / n_gaussians;
      state.means[j] = quantile_sorted(upper, level);
    }
  }

  const double mean = x.values.mean();
  const double var =
      (x.values.array() - mean).square().sum() / std::max<double>(1, x.values.size());
  state.variances.setConstant(std::max(var / n, variance_floor));
  return state;
}

Responsibilities e_step(const GmmState& state, const LoadMatrix& x) {
  validate(state);
  check_input(x);

  const Eigen::Index n = state.n_components();
  const Eigen::Index samples = x.values.size();
  const double* data = x.values.data();

  Matrix z(n, samples);
  Vector logp(n);
  for (Eigen::Index s = 0; s < samples; ++s) {
    double max_lp = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (state.priors[j] <= 0.0) {
        logp[j] = -std::numeric_limits<double>::infinity();
        continue;
      }
      logp[j] = std::log(state.priors[j]) +
                log_density(data[s], state.means[j], state.variances[j]);
      max_lp = std::max(max_lp, logp[j]);
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double e = std::isinf(logp[j]) ? 0.0 : std::exp(logp[j] - max_lp);
      z(j, s) = e;
      denom += e;
    }
    z.col(s) /= denom;
  }
  return Responsibilities{std::move(z)};
}

GmmState m_step(const Responsibilities& z, const LoadMatrix& x,
                const GmmState& previous) {
  check_input(x);
  const Eigen::Index n = previous.n_components();
  const Eigen::Index samples = x.values.size();
  if (z.z.rows() != n || z.z.cols() != samples) {
    throw DimensionError("gmm::m_step: responsibility shape mismatch");
  }
  const double* data = x.values.data();

  Vector weight = Vector::Zero(n);   // sum of z
  Vector weighted = Vector::Zero(n); // sum of z*x
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (Eigen::Index j = 0; j < n; ++j) {
      weight[j] += z.z(j, s);
      weighted[j] += z.z(j, s) * data[s];
    }
  }

  GmmState next;
  next.variance_floor = previous.variance_floor;
  next.priors = Vector::Zero(n);
  next.means = Vector::Zero(n);
  next.variances = Vector::Constant(n, previous.variance_floor);

  const double collapse_threshold = kCollapseFraction * static_cast<double>(samples);
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool dead = weight[j] < collapse_threshold;
    if (j > 0) {
      next.means[j] = dead ? previous.means[j] : weighted[j] / weight[j];
    }
    next.priors[j] = dead ? 0.0 : weight[j] / static_cast<double>(samples);
  }

  Vector sq = Vector::Zero(n);
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = data[s] - next.means[j];
      sq[j] += z.z(j, s) * d * d;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (weight[j] >= collapse_threshold) {
      next.variances[j] = std::max(sq[j] / weight[j], previous.variance_floor);
    }
  }

  const double total = next.priors.sum();
  if (total <= 0.0) {
    throw DataError("gmm::m_step: all components collapsed");
  }
  next.priors /= total;
  return next;
}

double log_likelihood(const GmmState& state, const LoadMatrix& x) {
  validate(state);
  check_input(x);

  const Eigen::Index n = state.n_components();
  const Eigen::Index samples = x.values.size();
  const double* data = x.values.data();

  KahanSum total;
  Vector logp(n);
  for (Eigen::Index s = 0; s < samples; ++s) {
    double max_lp = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (state.priors[j] <= 0.0) {
        logp[j] = -std::numeric_limits<double>::infinity();
        continue;
      }
      logp[j] = std::log(state.priors[j]) +
                log_density(data[s], state.means[j], state.variances[j]);
      max_lp = std::max(max_lp, logp[j]);
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isinf(logp[j])) acc += std::exp(logp[j] - max_lp);
    }
    total.add(max_lp + std::log(acc));
  }
  return total.value();
}

LoadMatrix extract_shiftable(const GmmState& state, const LoadMatrix& x) {
  validate(state);
  check_input(x);

  // Live nonzero-component means, ascending.
  std::vector<double> levels;
  for (Eigen::Index j = 1; j < state.n_components(); ++j) {
    if (state.priors[j] > 0.0) levels.push_back(state.means[j]);
  }
  std::sort(levels.begin(), levels.end());

  LoadMatrix out;
  out.role = LoadRole::ShiftableEstimate;
  out.values = Matrix::Zero(x.values.rows(), x.values.cols());
  if (levels.empty()) return out;

  const double* data = x.values.data();
  double* dst = out.values.data();
  for (Eigen::Index s = 0; s < x.values.size(); ++s) {
    // Largest level <= sample value, 0 if there is none.
    auto it = std::upper_bound(levels.begin(), levels.end(), data[s]);
    if (it != levels.begin()) dst[s] = *(it - 1);
  }
  return out;
}

}  // namespace nilm::gmm
