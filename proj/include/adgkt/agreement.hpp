#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adgkt/loss.hpp"
#include "adgkt/matrix.hpp"

// Agreement mechanism: gradient-conflict surgery on the shared encoder
// (GradVac with an EMA-tracked similarity target) and LogitNorm
// cross-entropy against dominant gradients.

namespace adgkt {

inline constexpr double kNormFloor = 1e-12;
inline constexpr double kAlphaBound = 1.0 - 1e-6;

/// Cosine similarity; 0 when either norm is below kNormFloor.
double cosine_similarity(std::span<const double> g_s, std::span<const double> g_t);

/// Aligns g_s towards g_t so that cos(g_s', g_t) == alpha, when phi < alpha.
///
/// g_s' = g_s + eta * g_t, with
///   eta = |g_s| (a sqrt(1 - phi^2) - phi sqrt(1 - a^2)) / (|g_t| sqrt(1 - a^2))
/// and a = alpha clamped to +-kAlphaBound. Returns g_s unchanged when the
/// guard does not fire or |g_t| < kNormFloor.
std::vector<double> gradvac_update(std::span<const double> g_s, std::span<const double> g_t, double phi,
                                   double alpha);

/// (1 - beta) * alpha_prev + beta * phi_prev, clamped to +-kAlphaBound.
double ema_update(double alpha_prev, double phi_prev, double beta);

/// 2|g_s||g_t| / (|g_s|^2 + |g_t|^2), in [0, 1]. 0 when both norms vanish.
double magnitude_similarity(std::span<const double> g_s, std::span<const double> g_t);

struct LogitNormConfig {
    double tau = 2.0;
    double epsilon = kNormFloor;

    void validate() const;
};

/// z / (tau * max(|z|, epsilon)).
std::vector<double> logitnorm(std::span<const double> z, const LogitNormConfig& cfg);
Matrix logitnorm_rows(const Matrix& z, const LogitNormConfig& cfg);

/// Batch-mean cross-entropy on LogitNorm-ed rows, with the exact gradient
/// w.r.t. the raw logits through the normalization.
LossGrad logitnorm_ce(const Matrix& z, Labels labels, const LogitNormConfig& cfg);

/// Source/target gradient pair on the shared encoder plus the EMA target.
struct GradState {
    std::vector<double> g_s;
    std::vector<double> g_t;
    double alpha = 0.0;
    double beta = 0.1;
    std::size_t step = 0;
};

struct AgreementOutcome {
    std::vector<double> g_s_post;
    double phi_raw = 0.0;
    double phi_post = 0.0;
    double alpha_used = 0.0;
    double mag_sim = 0.0;
    bool surgery_applied = false;
};

/// One agreement step on `state`: measures phi, applies GradVac against the
/// current alpha when enabled, then advances alpha with the raw phi.
AgreementOutcome agreement_step(GradState& state, bool use_gradvac);

}  // namespace adgkt
