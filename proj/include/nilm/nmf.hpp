#pragma once

#include "nilm/core.hpp"

#include <cstdint>

namespace nilm::nmf {

/// Rank-|B| non-negative factorization X ~ W * H of the fixed-load
/// estimate. Columns of W form the basis; the basis is kept close to
/// orthonormal by the natural-gradient form of the W update.
struct NmfFactors {
  Matrix basis;   ///< W, |T| x |B|, entries >= 0
  Matrix coeffs;  ///< H, |B| x |N|, entries >= 0

  Eigen::Index n_bases() const { return basis.cols(); }
};

/// Basis columns get disjoint row blocks filled with positive randoms and
/// normalized, which makes W'W = I exact at initialization; H starts at
/// W'X. Deterministic given the seed.
NmfFactors init_factors(const LoadMatrix& xf, int n_bases, std::uint64_t seed);

/// Multiplicative coefficient update H <- H o (W'X) / (W'W H), guarded
/// against zero denominators. Non-negativity and exact zeros are preserved.
NmfFactors update_coeffs(const NmfFactors& f, const LoadMatrix& xf);

/// Multiplicative basis update W <- W o (X H') / (W H X' W): the descent
/// direction is the natural gradient on the Stiefel manifold, which keeps
/// the columns approximately orthonormal without a projection step.
NmfFactors update_basis(const NmfFactors& f, const LoadMatrix& xf);

/// Squared Frobenius reconstruction error ||X - W H||_F^2.
double reconstruction_error(const NmfFactors& f, const LoadMatrix& xf);

/// ||W'W - I||_F, the orthonormality drift monitor.
double orthonormality_drift(const NmfFactors& f);

/// Fallback when drift exceeds its bound: rescale each basis column to unit
/// norm (a full re-orthogonalization could introduce negative entries).
void renormalize_columns(NmfFactors& f);

}  // namespace nilm::nmf
