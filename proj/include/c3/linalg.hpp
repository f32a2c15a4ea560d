#pragma once

#include <vector>

namespace c3 {

/// Eigendecomposition of a symmetric matrix (row-major n x n) by cyclic Jacobi
/// rotations. Converges when the off-diagonal Frobenius norm drops below
/// 1e-12 relative to the matrix norm, capped at 100 sweeps. Eigenvalues land
/// in `values` (unsorted); when `vectors` is non-null it receives the
/// orthonormal eigenvectors as columns (row-major, column j = eigenvector j).
void jacobi_eigen(std::vector<double> a, int n, std::vector<double>& values,
                  std::vector<double>* vectors);

/// Symmetric PSD square root via jacobi_eigen; negative eigenvalues clamp to 0.
std::vector<double> sym_sqrt(const std::vector<double>& a, int n);

std::vector<double> mat_mul(const std::vector<double>& a, const std::vector<double>& b, int n);

}  // namespace c3
