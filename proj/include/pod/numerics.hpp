#pragma once

#include <vector>

#include "pod/matrix.hpp"

namespace pod {

/// Eigendecomposition of a symmetric matrix: values sorted descending,
/// vectors(:, j) is the unit eigenvector paired with values[j]. Each vector's
/// largest-magnitude entry is made positive (ties: lowest index) so repeated
/// runs agree bit for bit.
struct Spectrum {
    std::vector<double> values;
    Matrix vectors;  // m x m, columns orthonormal
};

/// Covariance with the 1/n convention: (1/n) sum (x_i - xbar)(x_i - xbar)^T.
Matrix sample_covariance(const Matrix& x);
Matrix sample_covariance_serial(const Matrix& x);

/// Cyclic Jacobi sweeps; converges when the off-diagonal Frobenius norm drops
/// below 1e-12 * ||s||_F, capped at 100 sweeps.
Spectrum sym_eigen(const Matrix& s);

/// Minimizer of ||a b - y||^2 + ridge ||b||^2 via the normal equations.
/// With ridge = 0 a singular system raises NumericError so the caller can
/// retry with ridge > 0.
Matrix ols_solve(const Matrix& a, const Matrix& b, double ridge);

/// Cholesky factor L (lower) of a symmetric positive definite matrix.
Matrix cholesky(const Matrix& s);

}  // namespace pod
