#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "adgkt/agreement.hpp"
#include "adgkt/error.hpp"
#include "adgkt/rng.hpp"
#include "oracles.hpp"

using namespace adgkt;
using Vec = std::vector<double>;

TEST_CASE("cosine_similarity") {
    CHECK(cosine_similarity(Vec{1, 0}, Vec{0, 1}) == 0.0);
    CHECK(cosine_similarity(Vec{2, 0}, Vec{5, 0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(Vec{1, 0}, Vec{1, 1}) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(cosine_similarity(Vec{0, 0}, Vec{1, 1}) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(Vec{1, 0}, Vec{1}), DimensionError);
}

TEST_CASE("gradvac_update") {
    SUBCASE("hand example") {
        const Vec out = gradvac_update(Vec{1, 0}, Vec{0, 1}, 0.0, 0.5);
        CHECK(out[0] == 1.0);
        CHECK(out[1] == doctest::Approx(0.5 / std::sqrt(0.75)).epsilon(1e-15));
        CHECK(cosine_similarity(out, Vec{0, 1}) == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("guard: phi >= alpha leaves g_s untouched") {
        const Vec g_s{0.3, -1.2, 4.0}, g_t{1, 1, 1};
        const double phi = cosine_similarity(g_s, g_t);
        CHECK(gradvac_update(g_s, g_t, phi, phi - 0.1) == g_s);
        CHECK(gradvac_update(g_s, g_t, phi, phi) == g_s);
    }
    SUBCASE("vanishing g_t leaves g_s untouched") {
        CHECK(gradvac_update(Vec{1, 2}, Vec{0, 0}, 0.0, 0.5) == Vec{1, 2});
    }
    SUBCASE("alpha beyond the bound is clamped") {
        const Vec out = gradvac_update(Vec{1, 0}, Vec{0, 1}, 0.0, 2.0);
        CHECK(std::isfinite(out[1]));
        CHECK(cosine_similarity(out, Vec{0, 1}) == doctest::Approx(kAlphaBound).epsilon(1e-12));
    }
}

TEST_CASE("gradvac reaches alpha and never lowers agreement") {
    Rng rng(99);
    int fired = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t dim = 2 + rng.below(63);
        const Vec g_s = oracle::random_vector(rng, dim, std::exp(rng.uniform(-3, 3)));
        const Vec g_t = oracle::random_vector(rng, dim, std::exp(rng.uniform(-3, 3)));
        const double phi = cosine_similarity(g_s, g_t);
        const double alpha = rng.uniform(-kAlphaBound, kAlphaBound);
        const Vec out = gradvac_update(g_s, g_t, phi, alpha);
        if (phi < alpha) {
            ++fired;
            const double post = cosine_similarity(out, g_t);
            CHECK(std::abs(post - alpha) <= 1e-9);
            CHECK(post >= phi);
            // g_s' - g_s is parallel to g_t.
            Vec delta(dim);
            for (std::size_t i = 0; i < dim; ++i) delta[i] = out[i] - g_s[i];
            CHECK(std::abs(cosine_similarity(delta, g_t)) == doctest::Approx(1.0).epsilon(1e-9));
        } else {
            CHECK(out == g_s);
        }
    }
    CHECK(fired > 500);
}

TEST_CASE("ema_update") {
    CHECK(ema_update(0.0, 0.8, 0.1) == doctest::Approx(0.08).epsilon(1e-15));
    CHECK(ema_update(0.3, -0.4, 1.0) == -0.4);
    CHECK(ema_update(0.25, 0.25, 0.1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ema_update(0.9, 1.0, 1.0) == kAlphaBound);
    CHECK(ema_update(0.0, -1.0, 1.0) == -kAlphaBound);
    CHECK_THROWS_AS(ema_update(0.0, 0.5, 0.0), ConfigError);
    CHECK_THROWS_AS(ema_update(0.0, 0.5, 1.5), ConfigError);

    Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const double a = rng.uniform(-0.99, 0.99), p = rng.uniform(-1, 1), b = rng.uniform(1e-3, 1);
        const double out = ema_update(a, p, b);
        CHECK(out >= std::min(a, p) - 1e-15);
        CHECK(out <= std::max(a, p) + 1e-15);
    }
}

TEST_CASE("magnitude_similarity") {
    CHECK(magnitude_similarity(Vec{3, 4}, Vec{0, 5}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(magnitude_similarity(Vec{2, 0}, Vec{0, 1}) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(magnitude_similarity(Vec{2, 0}, Vec{0, 0}) == 0.0);
    CHECK(magnitude_similarity(Vec{0, 0}, Vec{0, 0}) == 0.0);
    CHECK_THROWS_AS(magnitude_similarity(Vec{1}, Vec{1, 2}), DimensionError);

    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        Vec a = oracle::random_vector(rng, 6), b = oracle::random_vector(rng, 6, 3.0);
        const double m = magnitude_similarity(a, b);
        CHECK(m >= 0.0);
        CHECK(m <= 1.0);
        CHECK(magnitude_similarity(b, a) == doctest::Approx(m).epsilon(1e-14));
        const double c = rng.uniform(0.01, 100);
        for (double& v : a) v *= c;
        for (double& v : b) v *= c;
        CHECK(magnitude_similarity(a, b) == doctest::Approx(m).epsilon(1e-12));
    }
}

TEST_CASE("logitnorm") {
    const LogitNormConfig cfg;
    const Vec z = logitnorm(Vec{3, 4}, cfg);
    CHECK(z[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(logitnorm(Vec{0, 0}, cfg) == Vec{0, 0});
    CHECK_THROWS_AS(logitnorm(Vec{1, 2}, LogitNormConfig{0.0}), ConfigError);
    CHECK_THROWS_AS(logitnorm(Vec{1, 2}, LogitNormConfig{1.0, 1e-3}), ConfigError);

    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const LogitNormConfig c{rng.uniform(0.05, 5.0)};
        const Vec v = oracle::random_vector(rng, 2 + rng.below(8), 10.0);
        const Vec out = logitnorm(v, c);
        CHECK(std::abs(norm(out) - 1.0 / c.tau) <= 1e-12);
        CHECK(argmax(out) == argmax(v));
        Vec scaled = v;
        const double s = std::exp(rng.uniform(-5, 5));
        for (double& x : scaled) x *= s;
        const Vec out2 = logitnorm(scaled, c);
        for (std::size_t k = 0; k < out.size(); ++k) CHECK(std::abs(out2[k] - out[k]) <= 1e-14);
    }
}

TEST_CASE("logitnorm_ce") {
    const LogitNormConfig cfg;
    SUBCASE("dominant correct class beats uniform") {
        const Matrix z = Matrix::from_rows({{8, 0.5, -1}});
        CHECK(logitnorm_ce(z, std::vector<std::size_t>{0}, cfg).loss < std::log(3.0));
    }
    SUBCASE("row scaling leaves the loss unchanged") {
        const Matrix z = Matrix::from_rows({{0.3, -1.2, 2.0}, {1, 1, -4}});
        const std::vector<std::size_t> y{2, 0};
        CHECK(logitnorm_ce(z * 10.0, y, cfg).loss == doctest::Approx(logitnorm_ce(z, y, cfg).loss).epsilon(1e-14));
    }
    SUBCASE("gradient matches central differences") {
        Rng rng(31);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 1 + rng.below(8), c = 2 + rng.below(4);
            const LogitNormConfig lc{rng.uniform(0.1, 4.0)};
            const Matrix z = oracle::random_matrix(rng, n, c, rng.uniform(0.2, 5.0));
            std::vector<std::size_t> y(n);
            for (auto& v : y) v = rng.below(c);
            const auto analytic = oracle::to_vector(logitnorm_ce(z, y, lc).grad);
            const auto numeric = oracle::central_difference(
                [&](const Vec& v) { return logitnorm_ce(oracle::from_vector(v, n, c), y, lc).loss; },
                oracle::to_vector(z));
            for (std::size_t i = 0; i < numeric.size(); ++i) CHECK(std::abs(analytic[i] - numeric[i]) <= 1e-6);
        }
    }
    SUBCASE("floored rows use the linear branch") {
        const Matrix z(1, 3);
        const LossGrad lg = logitnorm_ce(z, std::vector<std::size_t>{1}, cfg);
        CHECK(lg.loss == doctest::Approx(std::log(3.0)).epsilon(1e-15));
        CHECK(lg.grad.all_finite());
    }
}

TEST_CASE("agreement_step") {
    GradState st;
    st.g_s = {1, 0};
    st.g_t = {-0.6, 0.8};
    st.beta = 0.1;

    const AgreementOutcome first = agreement_step(st, true);
    CHECK(first.phi_raw == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK(first.alpha_used == 0.0);
    CHECK(first.surgery_applied);
    CHECK(std::abs(first.phi_post - 0.0) <= 1e-12);
    CHECK(st.alpha == doctest::Approx(-0.06).epsilon(1e-15));
    CHECK(st.step == 1);

    const AgreementOutcome second = agreement_step(st, false);
    CHECK_FALSE(second.surgery_applied);
    CHECK(second.g_s_post == st.g_s);
    CHECK(second.phi_post == second.phi_raw);
    CHECK(st.alpha == doctest::Approx(0.9 * -0.06 + 0.1 * -0.6).epsilon(1e-15));

    GradState bad;
    bad.g_s = {1, 2};
    bad.g_t = {1};
    CHECK_THROWS_AS(agreement_step(bad, true), DimensionError);
}
