#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adgkt/agreement.hpp"
#include "adgkt/loss.hpp"
#include "adgkt/matrix.hpp"
#include "adgkt/net.hpp"

namespace adgkt {

struct ArchConfig {
    std::size_t feat_dim = 32;    // extractor output d
    std::size_t hidden_dim = 64;  // hidden width inside every extractor/encoder
    std::size_t enc_dim = 32;     // encoder output h
};

struct SceneShape {
    std::size_t bands_source = 0;
    std::size_t bands_target = 0;
    std::size_t classes_source = 0;
    std::size_t classes_target = 0;
};

/// Every network component of the two-scene transfer model.
///
/// Agreement branch: source/target extractors F_s, F_t feed the shared
/// encoder G, followed by per-scene heads T_s, T_t. Disagreement branch:
/// a private target extractor, encoder and head (F'_t, G', T'_t) sharing
/// nothing with the agreement branch. Ensemble branch: G_en and T_en on
/// top of F_t.
struct ModelBundle {
    ModelBundle() = default;
    ModelBundle(const SceneShape& shape, const ArchConfig& arch, std::uint64_t seed);

    SceneShape shape;
    ArchConfig arch;

    Mlp source_extractor;   // F_s
    Mlp target_extractor;   // F_t
    Mlp shared_encoder;     // G
    Mlp source_head;        // T_s
    Mlp target_head;        // T_t
    Mlp private_extractor;  // F'_t
    Mlp private_encoder;    // G'
    Mlp private_head;       // T'_t
    Mlp ensemble_encoder;   // G_en
    Mlp ensemble_head;      // T_en

    /// Evaluation reads the ensemble head once it has been trained.
    bool ensemble_ready = false;

    /// (name, component) pairs in a stable order.
    std::vector<std::pair<std::string, Mlp*>> components();
    std::vector<std::pair<std::string, const Mlp*>> components() const;
};

Matrix forward_source(const ModelBundle& m, const Matrix& x_s);
Matrix forward_target_agree(const ModelBundle& m, const Matrix& x_t);

/// G(F_t(x)), the shared-branch features of target samples.
Matrix shared_target_features(const ModelBundle& m, const Matrix& x_t);

struct DisagreeOutput {
    Matrix features;  // G'(F'_t(x))
    Matrix logits;    // T'_t(G'(F'_t(x)))
};
DisagreeOutput forward_target_disagree(const ModelBundle& m, const Matrix& x_t);

Matrix forward_ensemble(const ModelBundle& m, const Matrix& x_t);

/// Logits of whichever target head evaluation uses.
Matrix predict_target(const ModelBundle& m, const Matrix& x_t);

struct TaskLossConfig {
    bool use_logitnorm = false;
    LogitNormConfig logitnorm;
};

struct SharedGradients {
    std::vector<double> g_s;  // dL_s / d theta_G
    std::vector<double> g_t;  // dL_t / d theta_G
    double loss_s = 0.0;
    double loss_t = 0.0;
    /// Smallest and largest row norm of the normalized logits over both
    /// batches (raw logits when LogitNorm is off).
    double logit_norm_min = 0.0;
    double logit_norm_max = 0.0;
};

/// Backpropagates L_s on the source batch and L_t on the target batch
/// separately. Returns the two flattened shared-encoder gradients; the
/// extractor and head gradient buffers are overwritten with their task's
/// gradient. The shared-encoder gradient buffer is left zeroed.
SharedGradients shared_gradients(ModelBundle& m, const Matrix& x_s, Labels y_s, const Matrix& x_t, Labels y_t,
                                 const TaskLossConfig& loss_cfg);

}  // namespace adgkt
