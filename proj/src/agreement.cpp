#include "adgkt/agreement.hpp"

#include <algorithm>
#include <cmath>

#include "adgkt/error.hpp"

namespace adgkt {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(what) + ": gradient lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
}

double clamp_alpha(double a) { return std::clamp(a, -kAlphaBound, kAlphaBound); }

}  // namespace

double cosine_similarity(std::span<const double> g_s, std::span<const double> g_t) {
    check_lengths(g_s, g_t, "cosine_similarity");
    const double ns = norm(g_s);
    const double nt = norm(g_t);
    if (ns < kNormFloor || nt < kNormFloor) return 0.0;
    return std::clamp(dot(g_s, g_t) / (ns * nt), -1.0, 1.0);
}

std::vector<double> gradvac_update(std::span<const double> g_s, std::span<const double> g_t, double phi,
                                   double alpha) {
    check_lengths(g_s, g_t, "gradvac_update");
    std::vector<double> out(g_s.begin(), g_s.end());
    const double target = clamp_alpha(alpha);
    const double nt = norm(g_t);
    if (!(phi < target) || nt < kNormFloor) return out;

    const double ns = norm(g_s);
    const double p = std::clamp(phi, -1.0, 1.0);
    const double sin_target = std::sqrt(1.0 - target * target);
    const double eta = ns * (target * std::sqrt(1.0 - p * p) - p * sin_target) / (nt * sin_target);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += eta * g_t[i];
    return out;
}

double ema_update(double alpha_prev, double phi_prev, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("ema_update: beta must lie in (0, 1]");
    return clamp_alpha((1.0 - beta) * alpha_prev + beta * phi_prev);
}

double magnitude_similarity(std::span<const double> g_s, std::span<const double> g_t) {
    check_lengths(g_s, g_t, "magnitude_similarity");
    const double ns = norm(g_s);
    const double nt = norm(g_t);
    const double denom = ns * ns + nt * nt;
    if (ns < kNormFloor && nt < kNormFloor) return 0.0;
    return 2.0 * ns * nt / denom;
}

void LogitNormConfig::validate() const {
    if (!(tau > 0.0)) throw ConfigError("logitnorm: tau must be > 0");
    if (!(epsilon > 0.0 && epsilon <= 1e-6)) throw ConfigError("logitnorm: epsilon must lie in (0, 1e-6]");
}

std::vector<double> logitnorm(std::span<const double> z, const LogitNormConfig& cfg) {
    cfg.validate();
    const double scale = 1.0 / (cfg.tau * std::max(norm(z), cfg.epsilon));
    std::vector<double> out(z.begin(), z.end());
    for (double& v : out) v *= scale;
    return out;
}

Matrix logitnorm_rows(const Matrix& z, const LogitNormConfig& cfg) {
    Matrix out(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto r = logitnorm(z.row(i), cfg);
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

LossGrad logitnorm_ce(const Matrix& z, Labels labels, const LogitNormConfig& cfg) {
    const Matrix zhat = logitnorm_rows(z, cfg);
    LossGrad ce = softmax_cross_entropy(zhat, labels);

    // Chain through zhat = z / (tau r): J = (I - tau^2 zhat zhat^T) / (tau r),
    // with J = I / (tau eps) on the floored branch.
    Matrix grad(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double r = norm(z.row(i));
        auto up = ce.grad.row(i);
        auto zh = zhat.row(i);
        auto g = grad.row(i);
        if (r < cfg.epsilon) {
            for (std::size_t k = 0; k < g.size(); ++k) g[k] = up[k] / (cfg.tau * cfg.epsilon);
            continue;
        }
        const double proj = cfg.tau * cfg.tau * dot(zh, up);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = (up[k] - proj * zh[k]) / (cfg.tau * r);
    }
    return {ce.loss, std::move(grad)};
}

AgreementOutcome agreement_step(GradState& state, bool use_gradvac) {
    check_lengths(state.g_s, state.g_t, "agreement_step");
    AgreementOutcome out;
    out.phi_raw = cosine_similarity(state.g_s, state.g_t);
    out.mag_sim = magnitude_similarity(state.g_s, state.g_t);
    out.alpha_used = state.alpha;
    if (use_gradvac && out.phi_raw < state.alpha && norm(state.g_t) >= kNormFloor) {
        out.g_s_post = gradvac_update(state.g_s, state.g_t, out.phi_raw, state.alpha);
        out.surgery_applied = true;
        out.phi_post = cosine_similarity(out.g_s_post, state.g_t);
    } else {
        out.g_s_post = state.g_s;
        out.phi_post = out.phi_raw;
    }
    state.alpha = ema_update(state.alpha, out.phi_raw, state.beta);
    ++state.step;
    return out;
}

}  // namespace adgkt
