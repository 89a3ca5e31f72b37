#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "adgkt/config.hpp"
#include "adgkt/data.hpp"
#include "adgkt/model.hpp"

namespace adgkt {

/// Per-step diagnostics of the agreement phase.
struct AgreeStepLog {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double phi_raw = 0.0;
    double phi_post = 0.0;
    double alpha = 0.0;  // target used by this step's guard
    double mag_sim = 0.0;
    double loss_s = 0.0;
    double loss_t = 0.0;
    double norm_gs = 0.0;
    double norm_gt = 0.0;
    bool gradvac_applied = false;
    bool logitnorm_active = false;
    double logit_norm_min = 0.0;
    double logit_norm_max = 0.0;
};

struct DisagreeStepLog {
    std::size_t step = 0;
    double loss_ce = 0.0;
    double dcor = 0.0;
};

struct EnsembleStepLog {
    std::size_t step = 0;
    double loss_ce = 0.0;
    double e_en1 = 0.0;
    double e_en2 = 0.0;
};

/// OA, AA and kappa as ratios.
struct Scores {
    double oa = 0.0;
    double aa = 0.0;
    double kappa = 0.0;
};

struct RunReport {
    Scores scores;
    std::vector<AgreeStepLog> agree;
    std::vector<DisagreeStepLog> disagree;
    std::vector<EnsembleStepLog> ensemble;
    ModelBundle model;
};

/// Three-phase run: agreement (joint source/target training of the shared
/// encoder with optional GradVac and LogitNorm), disagreement (private target
/// branch with optional distance-correlation penalty against the frozen
/// shared features), and ensemble (distillation from both frozen teachers).
RunReport train(const TrainConfig& cfg);

/// The few-shot train/eval split of `target` that `train` uses for `cfg`.
Split target_split(const TrainConfig& cfg, const SceneDataset& target);

/// Argmax over target logits of the head `predict_target` selects.
Scores evaluate(const ModelBundle& model, const SceneDataset& eval_split);

struct AblationRow {
    std::string label;
    TrainConfig config;
    RunReport report;
};

/// Cumulative component ladder: none, +GradVac, +LogitNorm, +ensemble, +DiR.
std::vector<AblationRow> ablate(const TrainConfig& cfg);

/// Toggle set of ladder row `index` (0..4) applied to `base`.
TrainConfig ablation_config(const TrainConfig& base, std::size_t index);

/// JSON-lines metric log: one object per step, then a final
/// {"oa","aa","kappa"} object in percent (two decimals).
void write_metric_log(const RunReport& report, std::ostream& out);

/// One JSON line per ladder row followed by nothing else.
void write_ablation_log(const std::vector<AblationRow>& rows, std::ostream& out);

/// Fixed-width text table of the ladder in percent.
std::string format_ablation_table(const std::vector<AblationRow>& rows);

double to_percent(double ratio);

}  // namespace adgkt
