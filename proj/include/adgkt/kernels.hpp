#pragma once

#include "adgkt/matrix.hpp"

// Dense inner loops shared by the network and the distance-correlation code.
//
// Every kernel exists twice: a plain serial reference in `serial::` and an
// OpenMP version in `parallel::`. The parallel versions split work over output
// rows only and keep the per-element summation order of the reference, so both
// produce bit-identical results for any thread count. The unqualified entry
// points dispatch to `parallel::` when the library is built with OpenMP.

namespace adgkt::kernels {

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix pairwise_distances(const Matrix& x, double smoothing);
Matrix double_center(const Matrix& d);

}  // namespace serial

namespace parallel {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix pairwise_distances(const Matrix& x, double smoothing);
Matrix double_center(const Matrix& d);

}  // namespace parallel

/// True when the parallel kernels were compiled with OpenMP.
bool openmp_enabled() noexcept;
int max_threads() noexcept;

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Euclidean distances between rows; off-diagonal entries are sqrt(d^2 + smoothing).
/// The diagonal is exactly zero.
Matrix pairwise_distances(const Matrix& x, double smoothing = 0.0);

/// A[i][j] = D[i][j] - rowmean_i - colmean_j + grandmean.
Matrix double_center(const Matrix& d);

}  // namespace adgkt::kernels
