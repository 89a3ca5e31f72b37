#pragma once

#include <span>
#include <vector>

#include "adgkt/matrix.hpp"

// Disagreement mechanism: a distance-correlation penalty between shared and
// private target features, and symmetric-KL distillation of the ensemble
// head from the agreement and disagreement teachers.

namespace adgkt {

/// Feature rows for one batch, n x d.
using FeatureBatch = Matrix;

/// Squared-distance smoothing used inside dir_loss.
inline constexpr double kDistanceSmoothing = 1e-12;
/// dVar below this counts as a constant batch (dCor defined as 0).
inline constexpr double kMinDistanceVariance = 1e-15;

struct DistillConfig {
    double temp_agree = 1.0;
    double temp_disagree = 0.05;
    /// Multiply KL terms by T^2 so gradient scale does not depend on T.
    bool scale_by_t2 = true;

    void validate() const;
};

/// n x n Euclidean distance matrix. Requires n >= 2.
Matrix pairwise_distances(const FeatureBatch& x);

Matrix double_center(const Matrix& d);

/// Biased sample distance correlation in [0, 1].
double distance_correlation(const FeatureBatch& x, const FeatureBatch& y);

struct DirLoss {
    double value = 0.0;
    Matrix grad_shared;
    Matrix grad_private;
};

/// Distance correlation between shared and private features with its exact
/// gradient w.r.t. both batches. Off-diagonal distances use sqrt(d^2 + 1e-12).
DirLoss dir_loss(const FeatureBatch& shared, const FeatureBatch& priv);

/// T^2 * KL(softmax(p/T) || softmax(q/T)); the T^2 factor is dropped when
/// `scale_by_t2` is false.
double kl_divergence(std::span<const double> p_logits, std::span<const double> q_logits, double temperature,
                     bool scale_by_t2 = true);

struct KlGrad {
    double value = 0.0;
    std::vector<double> grad_p;
    std::vector<double> grad_q;
};

KlGrad kl_divergence_grad(std::span<const double> p_logits, std::span<const double> q_logits, double temperature,
                          bool scale_by_t2 = true);

struct DistillLoss {
    double value = 0.0;
    Matrix grad_student;
};

/// Batch mean of KL(student || teacher) + KL(teacher || student). The teacher
/// is a constant: only the student receives a gradient.
DistillLoss symmetric_kl(const Matrix& student_logits, const Matrix& teacher_logits, double temperature,
                         bool scale_by_t2 = true);

/// Ensemble vs. agreement teacher T_t(G(F_t(x))).
DistillLoss ensemble_loss_agree(const Matrix& ens_logits, const Matrix& agree_logits, const DistillConfig& cfg);

/// Ensemble vs. disagreement teacher T'_t(G'(F'_t(x))).
DistillLoss ensemble_loss_disagree(const Matrix& ens_logits, const Matrix& disagree_logits,
                                   const DistillConfig& cfg);

inline double ensemble_total(double e_en1, double e_en2) { return e_en1 + e_en2; }

}  // namespace adgkt
