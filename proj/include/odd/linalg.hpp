#pragma once

#include "odd/matrix.hpp"

namespace odd::linalg {

/// Gram matrix of the columns of X: G[i][j] = col_i . col_j.
/// Computes the upper triangle and mirrors it, so G is symmetric bit-exactly.
/// Parallelized over rows; the serial mode performs identical arithmetic.
Matrix gram(const Matrix& X);

/// Cholesky factorization G = L L^T (lower triangle). Throws
/// NotPositiveDefinite when a pivot falls at or below 1e-12 * max diagonal,
/// which signals rank deficiency.
Matrix cholesky(const Matrix& G);

/// Solves G x = b for symmetric positive definite G via Cholesky.
Vector solve_spd(const Matrix& G, const Vector& b);

/// Solves L L^T x = b given a precomputed Cholesky factor.
Vector solve_with_cholesky(const Matrix& L, const Vector& b);

/// Largest singular value of M by power iteration on M^T M. Starts from the
/// normalized all-ones vector; stops when successive estimates differ by less
/// than tol * estimate; throws NoConvergence after 10000 iterations.
double spectral_norm(const Matrix& M, double tol);

/// Minimizes ||A x - b||_2 through the normal equations. If the Cholesky of
/// A^T A fails, retries with diagonal regularization 1e-12 * trace(A^T A)/cols
/// (escalated until the factorization succeeds), so this path never throws.
Vector least_squares(const Matrix& A, const Vector& b);

/// Smallest singular value of X restricted to the span of its columns:
/// sqrt of the smallest eigenvalue of X^T X, via inverse power iteration with
/// the same tolerance contract as spectral_norm. Requires linearly
/// independent columns (NotPositiveDefinite propagates otherwise).
double min_singular_on_span(const Matrix& X, double tol);

}  // namespace odd::linalg
