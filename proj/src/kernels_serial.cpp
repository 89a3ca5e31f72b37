#include <cmath>

#include "adgkt/error.hpp"
#include "adgkt/kernels.hpp"
#include "kernels_checks.hpp"

namespace adgkt::kernels::serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    detail::check_matmul(a.cols(), b.rows(), "matmul");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    detail::check_matmul(a.rows(), b.rows(), "matmul_tn");
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    detail::check_matmul(a.cols(), b.cols(), "matmul_nt");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
            c(i, j) = s;
        }
    }
    return c;
}

Matrix pairwise_distances(const Matrix& x, double smoothing) {
    const std::size_t n = x.rows();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double s = 0.0;
            for (std::size_t k = 0; k < x.cols(); ++k) {
                const double diff = x(i, k) - x(j, k);
                s += diff * diff;
            }
            d(i, j) = std::sqrt(s + smoothing);
        }
    }
    return d;
}

Matrix double_center(const Matrix& d) {
    detail::check_square(d, "double_center");
    const std::size_t n = d.rows();
    std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += d(i, j);
        row_mean[i] = s / static_cast<double>(n);
    }
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += d(i, j);
        col_mean[j] = s / static_cast<double>(n);
    }
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) grand += row_mean[i];
    grand /= static_cast<double>(n);

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = d(i, j) - row_mean[i] - col_mean[j] + grand;
    return a;
}

}  // namespace adgkt::kernels::serial
