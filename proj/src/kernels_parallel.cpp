#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "adgkt/kernels.hpp"
#include "kernels_checks.hpp"

namespace adgkt::kernels {

namespace parallel {

Matrix matmul(const Matrix& a, const Matrix& b) {
    detail::check_matmul(a.cols(), b.rows(), "matmul");
    const auto m = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t inner = a.cols();
    const std::size_t p = b.cols();
    Matrix c(a.rows(), p);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        auto crow = c.row(static_cast<std::size_t>(i));
        auto arow = a.row(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = arow[k];
            auto brow = b.row(k);
            for (std::size_t j = 0; j < p; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    detail::check_matmul(a.rows(), b.rows(), "matmul_tn");
    const auto m = static_cast<std::ptrdiff_t>(a.cols());
    const std::size_t inner = a.rows();
    const std::size_t p = b.cols();
    Matrix c(a.cols(), p);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        const auto col = static_cast<std::size_t>(i);
        auto crow = c.row(col);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aki = a(k, col);
            auto brow = b.row(k);
            for (std::size_t j = 0; j < p; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    detail::check_matmul(a.cols(), b.cols(), "matmul_nt");
    const auto m = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t inner = a.cols();
    Matrix c(a.rows(), b.rows());

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        auto arow = a.row(static_cast<std::size_t>(i));
        auto crow = c.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < b.rows(); ++j) {
            auto brow = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < inner; ++k) s += arow[k] * brow[k];
            crow[j] = s;
        }
    }
    return c;
}

Matrix pairwise_distances(const Matrix& x, double smoothing) {
    const std::size_t n = x.rows();
    Matrix d(n, n);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        auto xi = x.row(i);
        auto drow = d.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            auto xj = x.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < xi.size(); ++k) {
                const double diff = xi[k] - xj[k];
                s += diff * diff;
            }
            drow[j] = std::sqrt(s + smoothing);
        }
    }
    return d;
}

Matrix double_center(const Matrix& d) {
    detail::check_square(d, "double_center");
    const std::size_t n = d.rows();
    const auto sn = static_cast<std::ptrdiff_t>(n);
    const double inv_n = static_cast<double>(n);
    std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        double s = 0.0;
        for (double v : d.row(static_cast<std::size_t>(i))) s += v;
        row_mean[static_cast<std::size_t>(i)] = s / inv_n;
    }

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < sn; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += d(i, static_cast<std::size_t>(j));
        col_mean[static_cast<std::size_t>(j)] = s / inv_n;
    }

    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) grand += row_mean[i];
    grand /= inv_n;

    Matrix a(n, n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < sn; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = 0; j < n; ++j) a(i, j) = d(i, j) - row_mean[i] - col_mean[j] + grand;
    }
    return a;
}

}  // namespace parallel

bool openmp_enabled() noexcept {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

#ifdef _OPENMP
namespace impl = parallel;
#else
namespace impl = serial;
#endif

Matrix matmul(const Matrix& a, const Matrix& b) { return impl::matmul(a, b); }
Matrix matmul_tn(const Matrix& a, const Matrix& b) { return impl::matmul_tn(a, b); }
Matrix matmul_nt(const Matrix& a, const Matrix& b) { return impl::matmul_nt(a, b); }
Matrix pairwise_distances(const Matrix& x, double smoothing) { return impl::pairwise_distances(x, smoothing); }
Matrix double_center(const Matrix& d) { return impl::double_center(d); }

}  // namespace adgkt::kernels
