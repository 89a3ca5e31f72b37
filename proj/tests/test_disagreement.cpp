#include <doctest.h>

#include <cmath>
#include <vector>

#include "adgkt/disagreement.hpp"
#include "adgkt/error.hpp"
#include "adgkt/loss.hpp"
#include "adgkt/rng.hpp"
#include "oracles.hpp"

using namespace adgkt;
using Vec = std::vector<double>;

TEST_CASE("pairwise_distances") {
    CHECK(pairwise_distances(Matrix::from_rows({{0, 0}, {3, 4}}))(0, 1) == 5.0);
    CHECK(pairwise_distances(Matrix::from_rows({{1, 2}, {1, 2}, {1, 2}})) == Matrix(3, 3));
    CHECK_THROWS_AS(pairwise_distances(Matrix(1, 3)), SampleCountError);

    Rng rng(6);
    const Matrix d = pairwise_distances(oracle::random_matrix(rng, 9, 3));
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(d(i, i) == 0.0);
        for (std::size_t j = 0; j < 9; ++j) CHECK(d(i, j) == d(j, i));
    }
}

TEST_CASE("double_center") {
    CHECK(double_center(Matrix(4, 4, 2.5)) == Matrix(4, 4));
    const Matrix a = double_center(Matrix::from_rows({{0, 5}, {5, 0}}));
    CHECK(a == Matrix::from_rows({{-2.5, 2.5}, {2.5, -2.5}}));
    CHECK_THROWS_AS(double_center(Matrix(2, 3)), DimensionError);

    Rng rng(8);
    const Matrix c = double_center(pairwise_distances(oracle::random_matrix(rng, 7, 2)));
    for (std::size_t i = 0; i < 7; ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
            row += c(i, j);
            col += c(j, i);
        }
        CHECK(std::abs(row) <= 1e-9);
        CHECK(std::abs(col) <= 1e-9);
    }
    const Matrix twice = double_center(c);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(twice.values()[i] - c.values()[i]) <= 1e-12);
}

TEST_CASE("distance_correlation") {
    Rng rng(15);
    SUBCASE("self and affine dependence") {
        const Matrix x = oracle::random_matrix(rng, 12, 3);
        CHECK(distance_correlation(x, x) == doctest::Approx(1.0).epsilon(1e-12));
        Matrix y = x * 2.0;
        for (std::size_t i = 0; i < y.rows(); ++i) y(i, 1) += 7.0;
        CHECK(std::abs(distance_correlation(x, y) - 1.0) <= 1e-9);
        CHECK(std::abs(distance_correlation(x, x * -0.3) - 1.0) <= 1e-9);
    }
    SUBCASE("constant batch carries no dependence") {
        CHECK(distance_correlation(Matrix(5, 2, 1.0), oracle::random_matrix(rng, 5, 2)) == 0.0);
    }
    SUBCASE("mismatched sample counts") {
        CHECK_THROWS_AS(distance_correlation(Matrix(4, 2), Matrix(5, 2)), SampleCountError);
        CHECK_THROWS_AS(distance_correlation(Matrix(1, 2), Matrix(1, 2)), SampleCountError);
    }
    SUBCASE("range, symmetry and invariances") {
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + rng.below(14);
            const Matrix x = oracle::random_matrix(rng, n, 1 + rng.below(4));
            Matrix y = oracle::random_matrix(rng, n, 1 + rng.below(4));
            const double r = distance_correlation(x, y);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            CHECK(distance_correlation(y, x) == doctest::Approx(r).epsilon(1e-12));
            Matrix shifted = y;
            const double shift = rng.uniform(-10, 10);
            for (double& v : shifted.values()) v += shift;
            CHECK(std::abs(distance_correlation(x, shifted) - r) <= 1e-9);
            CHECK(std::abs(distance_correlation(x, y * rng.uniform(-5, -0.1)) - r) <= 1e-9);
        }
    }
    SUBCASE("matches the four-loop oracle") {
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + rng.below(9);
            const Matrix x = oracle::random_matrix(rng, n, 1 + rng.below(4));
            const Matrix y = oracle::random_matrix(rng, n, 1 + rng.below(4));
            CHECK(std::abs(distance_correlation(x, y) - oracle::naive_dcor(x, y)) <= 1e-10);
        }
    }
    SUBCASE("independent samples score low") {
        double mean = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng r(seed);
            mean += distance_correlation(oracle::random_matrix(r, 256, 1), oracle::random_matrix(r, 256, 1));
        }
        CHECK(mean / 20.0 < 0.15);
    }
}

TEST_CASE("dir_loss") {
    Rng rng(42);
    SUBCASE("identical batches give the maximal penalty") {
        const Matrix x = oracle::random_matrix(rng, 6, 3);
        CHECK(dir_loss(x, x).value == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("value agrees with distance_correlation") {
        const Matrix x = oracle::random_matrix(rng, 8, 3), y = oracle::random_matrix(rng, 8, 2);
        CHECK(std::abs(dir_loss(x, y).value - distance_correlation(x, y)) <= 1e-9);
    }
    SUBCASE("gradients match central differences") {
        int checked = 0;
        for (int trial = 0; trial < 80; ++trial) {
            const std::size_t n = 2 + rng.below(7), dx = 1 + rng.below(4), dy = 1 + rng.below(4);
            const Matrix x = oracle::random_matrix(rng, n, dx);
            const Matrix y = oracle::random_matrix(rng, n, dy);
            const DirLoss dl = dir_loss(x, y);
            if (dl.value == 0.0) continue;  // negative dCov: clamped region, gradient defined as 0
            const auto nx = oracle::central_difference(
                [&](const Vec& v) { return dir_loss(oracle::from_vector(v, n, dx), y).value; }, oracle::to_vector(x));
            const auto ny = oracle::central_difference(
                [&](const Vec& v) { return dir_loss(x, oracle::from_vector(v, n, dy)).value; }, oracle::to_vector(y));
            CHECK(oracle::max_relative_error(oracle::to_vector(dl.grad_shared), nx) <= 1e-4);
            CHECK(oracle::max_relative_error(oracle::to_vector(dl.grad_private), ny) <= 1e-4);
            ++checked;
        }
        CHECK(checked >= 50);
    }
    SUBCASE("gradient descent decorrelates a dependent pair") {
        const Matrix x = oracle::random_matrix(rng, 16, 3);
        Matrix y(16, 2);
        for (std::size_t i = 0; i < 16; ++i) {
            y(i, 0) = x(i, 0) + 0.1 * rng.normal();
            y(i, 1) = x(i, 1) * x(i, 2) + 0.1 * rng.normal();
        }
        std::vector<double> trace;
        for (int step = 0; step < 50; ++step) {
            const DirLoss dl = dir_loss(x, y);
            trace.push_back(dl.value);
            y -= dl.grad_private * 0.5;
        }
        // Three-step moving average must fall at every step.
        for (std::size_t i = 3; i < trace.size(); ++i) {
            const double prev = trace[i - 3] + trace[i - 2] + trace[i - 1];
            const double cur = trace[i - 2] + trace[i - 1] + trace[i];
            CHECK(cur < prev);
        }
        CHECK(trace.back() < trace.front());
    }
}

TEST_CASE("kl_divergence") {
    CHECK(kl_divergence(Vec{0.3, -2, 1}, Vec{0.3, -2, 1}, 1.0) == 0.0);
    // softmax(p) = (0.5, 0.5), softmax(q) = (0.9, 0.1)
    const double expect = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(kl_divergence(Vec{0, 0}, Vec{std::log(9.0), 0}, 1.0) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(expect == doctest::Approx(0.5108).epsilon(1e-4));
    CHECK_THROWS_AS(kl_divergence(Vec{0, 0}, Vec{1, 0}, 0.0), ConfigError);
    CHECK_THROWS_AS(kl_divergence(Vec{0, 0}, Vec{1, 0}, -1.0), ConfigError);
    CHECK_THROWS_AS(kl_divergence(Vec{0, 0}, Vec{1, 0, 2}, 1.0), DimensionError);

    SUBCASE("T^2 scaling") {
        const Vec p{1, 2, -1}, q{0, 0.5, 0.2};
        CHECK(kl_divergence(p, q, 3.0, true) == doctest::Approx(9.0 * kl_divergence(p, q, 3.0, false)).epsilon(1e-14));
    }
    SUBCASE("Gibbs inequality") {
        Rng rng(3);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t c = 2 + rng.below(6);
            CHECK(kl_divergence(oracle::random_vector(rng, c, 3), oracle::random_vector(rng, c, 3),
                                rng.uniform(0.05, 5)) >= 0.0);
        }
    }
    SUBCASE("gradients match central differences") {
        Rng rng(19);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t c = 2 + rng.below(4);
            const double t = rng.uniform(0.2, 3.0);
            const bool scale = trial % 2 == 0;
            const Vec p = oracle::random_vector(rng, c), q = oracle::random_vector(rng, c);
            const KlGrad g = kl_divergence_grad(p, q, t, scale);
            const auto np =
                oracle::central_difference([&](const Vec& v) { return kl_divergence(v, q, t, scale); }, p);
            const auto nq =
                oracle::central_difference([&](const Vec& v) { return kl_divergence(p, v, t, scale); }, q);
            CHECK(oracle::max_relative_error(g.grad_p, np) <= 1e-4);
            CHECK(oracle::max_relative_error(g.grad_q, nq) <= 1e-4);
        }
    }
}

TEST_CASE("ensemble losses") {
    const DistillConfig cfg;
    Rng rng(23);
    const Matrix e = oracle::random_matrix(rng, 4, 3), a = oracle::random_matrix(rng, 4, 3);

    CHECK(ensemble_loss_agree(e, e, cfg).value == 0.0);
    CHECK(ensemble_loss_disagree(e, e, cfg).value == 0.0);
    CHECK(ensemble_loss_agree(e, a, cfg).value ==
          doctest::Approx(ensemble_loss_agree(a, e, cfg).value).epsilon(1e-14));
    CHECK(ensemble_loss_agree(e, a, cfg).value == doctest::Approx(2.0 * oracle::jeffreys(e, a, 1.0)).epsilon(1e-12));
    CHECK(ensemble_loss_disagree(e, a, cfg).value ==
          doctest::Approx(0.05 * 0.05 * 2.0 * oracle::jeffreys(e, a, 0.05)).epsilon(1e-10));
    CHECK_THROWS_AS(ensemble_loss_agree(e, Matrix(4, 2), cfg), DimensionError);
    CHECK_THROWS_AS(ensemble_loss_agree(e, a, DistillConfig{0.0}), ConfigError);

    SUBCASE("sharp teacher costs more than a uniform one") {
        const Matrix student = Matrix::from_rows({{0, 0, 0}});
        const Matrix sharp = Matrix::from_rows({{1, 0, 0}});
        const Matrix flat = Matrix::from_rows({{0.4, 0.4, 0.4}});
        CHECK(ensemble_loss_disagree(student, sharp, cfg).value > ensemble_loss_disagree(student, flat, cfg).value);
    }
    SUBCASE("values are non-negative and vanish only for equal distributions") {
        for (int trial = 0; trial < 200; ++trial) {
            const Matrix s = oracle::random_matrix(rng, 3, 4), t = oracle::random_matrix(rng, 3, 4);
            CHECK(ensemble_loss_disagree(s, t, cfg).value >= 0.0);
            CHECK(ensemble_loss_agree(s, t, cfg).value > 0.0);
            Matrix shifted = s;
            for (std::size_t i = 0; i < 3; ++i)
                for (double& v : shifted.row(i)) v += static_cast<double>(i) - 1.5;
            CHECK(ensemble_loss_agree(s, shifted, cfg).value <= 1e-14);
        }
    }
    SUBCASE("student gradient matches central differences, teacher untouched") {
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t n = 1 + rng.below(6), c = 2 + rng.below(4);
            const DistillConfig dc{rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), trial % 2 == 0};
            const Matrix s = oracle::random_matrix(rng, n, c), t = oracle::random_matrix(rng, n, c);
            const Matrix t_copy = t;
            for (int which = 0; which < 2; ++which) {
                auto loss = [&](const Matrix& m) {
                    return which == 0 ? ensemble_loss_agree(m, t, dc) : ensemble_loss_disagree(m, t, dc);
                };
                const auto numeric = oracle::central_difference(
                    [&](const Vec& v) { return loss(oracle::from_vector(v, n, c)).value; }, oracle::to_vector(s));
                CHECK(oracle::max_relative_error(oracle::to_vector(loss(s).grad_student), numeric) <= 1e-4);
            }
            CHECK(t == t_copy);
        }
    }
}

TEST_CASE("ensemble_total") {
    CHECK(ensemble_total(0.0, 0.0) == 0.0);
    CHECK(ensemble_total(0.3, 0.7) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ensemble_total(0.3, 0.7) == ensemble_total(0.7, 0.3));
}
