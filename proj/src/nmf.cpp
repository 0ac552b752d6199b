#include "nilm/nmf.hpp"

#include "nilm/rng.hpp"

#include <cmath>

namespace nilm::nmf {

namespace {

constexpr double kDenominatorGuard = 1e-12;

void check_shapes(const NmfFactors& f, const LoadMatrix& xf) {
  if (f.basis.rows() != xf.values.rows() || f.coeffs.cols() != xf.values.cols() ||
      f.basis.cols() != f.coeffs.rows()) {
    throw DimensionError("nmf: factor/data shape mismatch");
  }
}

}  // namespace

NmfFactors init_factors(const LoadMatrix& xf, int n_bases, std::uint64_t seed) {
  const Eigen::Index T = xf.values.rows();
  if (n_bases < 1 || n_bases >= T) {
    throw ConfigError("nmf: n_bases must satisfy 1 <= |B| < |T|");
  }

  Rng rng(seed);
  NmfFactors f;
  f.basis = Matrix::Zero(T, n_bases);

  // Disjoint row blocks, sized as evenly as the division allows.
  const Eigen::Index base = T / n_bases;
  const Eigen::Index extra = T % n_bases;
  Eigen::Index row = 0;
  for (int b = 0; b < n_bases; ++b) {
    const Eigen::Index len = base + (b < extra ? 1 : 0);
    for (Eigen::Index i = 0; i < len; ++i) {
      f.basis(row + i, b) = rng.uniform(0.1, 1.0);
    }
    f.basis.col(b) /= f.basis.col(b).norm();
    row += len;
  }

  f.coeffs = (f.basis.transpose() * xf.values).cwiseMax(0.0);
  return f;
}

NmfFactors update_coeffs(const NmfFactors& f, const LoadMatrix& xf) {
  check_shapes(f, xf);
  const Matrix numer = f.basis.transpose() * xf.values;
  const Matrix denom = (f.basis.transpose() * f.basis) * f.coeffs;
  NmfFactors out = f;
  out.coeffs.array() *= numer.array() / (denom.array() + kDenominatorGuard);
  return out;
}

NmfFactors update_basis(const NmfFactors& f, const LoadMatrix& xf) {
  check_shapes(f, xf);
  const Matrix numer = xf.values * f.coeffs.transpose();
  const Matrix denom =
      f.basis * (f.coeffs * (xf.values.transpose() * f.basis));
  NmfFactors out = f;
  out.basis.array() *= numer.array() / (denom.array() + kDenominatorGuard);
  return out;
}

double reconstruction_error(const NmfFactors& f, const LoadMatrix& xf) {
  check_shapes(f, xf);
  return (xf.values - f.basis * f.coeffs).squaredNorm();
}

double orthonormality_drift(const NmfFactors& f) {
  const Eigen::Index b = f.n_bases();
  return (f.basis.transpose() * f.basis - Matrix::Identity(b, b)).norm();
}

void renormalize_columns(NmfFactors& f) {
  for (Eigen::Index b = 0; b < f.basis.cols(); ++b) {
    const double norm = f.basis.col(b).norm();
    if (norm > 0.0) f.basis.col(b) /= norm;
  }
}

}  // namespace nilm::nmf
