#pragma once

#include <complex>

#include "layerlq/types.hpp"

namespace layerlq {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Tolerances for semidefinite verdicts, relative to the spectral norm.
inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kPdTolerance = 1e-12;

struct SymmetricEigen {
  Matrix vectors;  // orthonormal columns
  Vector values;   // ascending
};

/// s == vectors * diag(values) * vectors^T. Rejects inputs with
/// ||s - s^T|| > 1e-10 ||s||.
SymmetricEigen eig_sym(const Matrix& s);

/// Lower-triangular L with positive diagonal and f == L L^T. Throws
/// NotPositiveDefinite when a pivot is not safely positive.
Matrix cholesky(const Matrix& f);

/// Rank-revealing square root through the eigendecomposition: returns F with
/// F^T F == s for symmetric PSD s. Eigenvalues below the PSD tolerance are dropped,
/// so F has rank(s) rows (at least one row, possibly zero).
Matrix psd_factor(const Matrix& s);

/// Symmetric PSD square root s^{1/2}.
Matrix sqrt_psd(const Matrix& s);

double min_eig(const Matrix& s);
double max_eig(const Matrix& s);
double spectral_norm(const Matrix& m);

/// Max real part of the eigenvalues.
double spectral_abscissa(const Matrix& a);

/// s ⪰ 0 within kPsdTolerance * ||s||_2, and s ≻ 0 with a margin of kPdTolerance * ||s||_2.
bool is_psd(const Matrix& s);
bool is_pd(const Matrix& s);

Matrix symmetrize(const Matrix& m);

/// Dimension of the span of [B, AB, ..., A^{n-1}B]. Computed with an orthogonal
/// Krylov staircase: each block is orthogonalized against the accumulated basis and
/// its rank is read off the singular values with threshold n * eps * scale.
Index controllability_rank(const Matrix& a, const Matrix& b);
Index observability_rank(const Matrix& a, const Matrix& c);

/// X with a^T X + X a + c == 0 (Bartels–Stewart on the real Schur form of a).
/// Throws NoStabilizingSolution when a and -a share an eigenvalue.
Matrix solve_lyapunov(const Matrix& a, const Matrix& c);

/// Complex Schur form H = U T U^H with the eigenvalues of negative real part moved to
/// the leading block. Returns U; `stable_count` receives the size of that block.
ComplexMatrix ordered_schur_basis(const Matrix& h, Index& stable_count, double axis_tolerance);

}  // namespace layerlq
