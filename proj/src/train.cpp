#include "adgkt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adgkt/agreement.hpp"
#include "adgkt/disagreement.hpp"
#include "adgkt/error.hpp"
#include "adgkt/loss.hpp"
#include "adgkt/metrics.hpp"
#include "adgkt/rng.hpp"

namespace adgkt {

namespace {

// Independent streams per concern, so toggling a later phase never perturbs
// an earlier one.
enum StreamSalt : std::uint64_t {
    kSplitStream = 1,
    kModelStream = 2,
    kAgreeStream = 3,
    kDisagreeStream = 4,
    kEnsembleStream = 5,
};

std::uint64_t stream_seed(std::uint64_t seed, StreamSalt salt) { return Rng(seed).fork(salt).next(); }

struct Batch {
    Matrix x;
    std::vector<std::size_t> y;
};

Batch take(const SceneDataset& ds, std::span<const std::size_t> idx) {
    Batch b{gather_rows(ds.spectra, idx), {}};
    b.y.reserve(idx.size());
    for (std::size_t i : idx) b.y.push_back(ds.labels[i]);
    return b;
}

Batch sample_with_replacement(const SceneDataset& ds, std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(ds.size()));
    return take(ds, idx);
}

void scale_grad(ParamSet& p, double w) {
    if (w == 1.0) return;
    for (auto& l : p.layers()) {
        l.grad_weight *= w;
        l.grad_bias *= w;
    }
}

void run_agreement_phase(const TrainConfig& cfg, ModelBundle& model, const SceneDataset& source,
                         const SceneDataset& target_train, std::size_t steps_per_epoch, RunReport& report) {
    Rng rng(stream_seed(cfg.seed, kAgreeStream));
    const AdamConfig adam = cfg.adam();
    TaskLossConfig loss_cfg;
    loss_cfg.logitnorm.tau = cfg.tau;

    GradState state;
    state.beta = cfg.beta;
    state.alpha = 0.0;
    double prev_mag_sim = 0.0;

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs_agree; ++epoch) {
        std::vector<std::size_t> order;
        for (std::size_t b = 0; b < steps_per_epoch; ++b) {
            if (order.size() < cfg.batch_size) {
                // Refill with a fresh pass over the source scene.
                auto next = rng.permutation(source.size());
                order.insert(order.end(), next.begin(), next.end());
            }
            const std::size_t take_n = std::min(cfg.batch_size, source.size());
            const std::vector<std::size_t> idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take_n));
            order.erase(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take_n));

            const Batch sb = take(source, idx);
            const Batch tb = sample_with_replacement(target_train, cfg.batch_size, rng);

            loss_cfg.use_logitnorm = cfg.use_logitnorm && prev_mag_sim <= cfg.phi_mag_threshold;
            SharedGradients sg = shared_gradients(model, sb.x, sb.y, tb.x, tb.y, loss_cfg);
            for (double& g : sg.g_s) g *= cfg.source_weight;
            for (double& g : sg.g_t) g *= cfg.target_weight;
            scale_grad(model.source_extractor.params(), cfg.source_weight);
            scale_grad(model.source_head.params(), cfg.source_weight);
            scale_grad(model.target_extractor.params(), cfg.target_weight);
            scale_grad(model.target_head.params(), cfg.target_weight);

            AgreeStepLog log;
            log.step = step;
            log.epoch = epoch;
            log.loss_s = sg.loss_s;
            log.loss_t = sg.loss_t;
            log.norm_gs = norm(sg.g_s);
            log.norm_gt = norm(sg.g_t);
            log.logitnorm_active = loss_cfg.use_logitnorm;
            log.logit_norm_min = sg.logit_norm_min;
            log.logit_norm_max = sg.logit_norm_max;

            state.g_s = std::move(sg.g_s);
            state.g_t = std::move(sg.g_t);
            AgreementOutcome outcome = agreement_step(state, cfg.use_gradvac);
            log.phi_raw = outcome.phi_raw;
            log.phi_post = outcome.phi_post;
            log.alpha = outcome.alpha_used;
            log.mag_sim = outcome.mag_sim;
            log.gradvac_applied = outcome.surgery_applied;
            prev_mag_sim = outcome.mag_sim;

            std::vector<double> combined = std::move(outcome.g_s_post);
            for (std::size_t i = 0; i < combined.size(); ++i) combined[i] += state.g_t[i];
            model.shared_encoder.params().set_grad(combined);

            model.source_extractor.step(adam);
            model.target_extractor.step(adam);
            model.shared_encoder.step(adam);
            model.source_head.step(adam);
            model.target_head.step(adam);

            report.agree.push_back(log);
            ++step;
        }
    }
}

void run_disagreement_phase(const TrainConfig& cfg, ModelBundle& model, const SceneDataset& target_train,
                            std::size_t steps, RunReport& report) {
    Rng rng(stream_seed(cfg.seed, kDisagreeStream));
    const AdamConfig adam = cfg.adam();

    for (std::size_t step = 0; step < steps; ++step) {
        const Batch tb = sample_with_replacement(target_train, cfg.batch_size, rng);

        Mlp::Cache ext_cache, enc_cache, head_cache;
        const Matrix f = model.private_extractor.forward(tb.x, ext_cache);
        const Matrix feats = model.private_encoder.forward(f, enc_cache);
        const Matrix logits = model.private_head.forward(feats, head_cache);

        model.private_extractor.params().zero_grad();
        model.private_encoder.params().zero_grad();
        model.private_head.params().zero_grad();

        const LossGrad ce = softmax_cross_entropy(logits, tb.y);
        Matrix d_feats = model.private_head.backward(head_cache, ce.grad);

        DisagreeStepLog log{step, ce.loss, 0.0};
        if (cfg.use_dir) {
            const Matrix shared = shared_target_features(model, tb.x);
            DirLoss dir = dir_loss(shared, feats);
            log.dcor = dir.value;
            d_feats += dir.grad_private * cfg.dcor_weight;
        }
        const Matrix d_f = model.private_encoder.backward(enc_cache, d_feats);
        model.private_extractor.backward(ext_cache, d_f);

        model.private_extractor.step(adam);
        model.private_encoder.step(adam);
        model.private_head.step(adam);
        report.disagree.push_back(log);
    }
}

void run_ensemble_phase(const TrainConfig& cfg, ModelBundle& model, const SceneDataset& target_train,
                        std::size_t steps, RunReport& report) {
    Rng rng(stream_seed(cfg.seed, kEnsembleStream));
    const AdamConfig adam = cfg.adam();
    const DistillConfig distill{cfg.temp_agree, cfg.temp_disagree, cfg.kd_t2_scaling};

    for (std::size_t step = 0; step < steps; ++step) {
        const Batch tb = sample_with_replacement(target_train, cfg.batch_size, rng);

        // F_t stays frozen: it provides both the ensemble input and the
        // agreement teacher.
        const Matrix f = model.target_extractor.forward(tb.x);
        const Matrix agree_teacher = forward_target_agree(model, tb.x);
        const Matrix disagree_teacher = forward_target_disagree(model, tb.x).logits;

        Mlp::Cache enc_cache, head_cache;
        const Matrix e = model.ensemble_encoder.forward(f, enc_cache);
        const Matrix logits = model.ensemble_head.forward(e, head_cache);

        model.ensemble_encoder.params().zero_grad();
        model.ensemble_head.params().zero_grad();

        const LossGrad ce = softmax_cross_entropy(logits, tb.y);
        const DistillLoss e1 = ensemble_loss_agree(logits, agree_teacher, distill);
        const DistillLoss e2 = ensemble_loss_disagree(logits, disagree_teacher, distill);

        Matrix grad = ce.grad;
        grad += (e1.grad_student + e2.grad_student) * cfg.ensemble_weight;
        const Matrix d_e = model.ensemble_head.backward(head_cache, grad);
        model.ensemble_encoder.backward(enc_cache, d_e);

        model.ensemble_encoder.step(adam);
        model.ensemble_head.step(adam);
        report.ensemble.push_back({step, ce.loss, e1.value, e2.value});
    }
    model.ensemble_ready = steps > 0;
}

}  // namespace

RunReport train(const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.use_dir && cfg.batch_size < 2) throw ConfigError("use_dir needs batch_size >= 2");

    const ScenePair pair = generate_pair(cfg.synth);
    const Split split = target_split(cfg, pair.target);
    if (split.eval.size() == 0) throw DataError("target scene leaves no samples for evaluation");

    const SceneShape shape{pair.source.bands, pair.target.bands, pair.source.classes, pair.target.classes};
    RunReport report;
    report.model = ModelBundle(shape, cfg.arch(), stream_seed(cfg.seed, kModelStream));

    const std::size_t pool = std::max(pair.source.size(), split.train.size());
    const std::size_t steps_per_epoch = (pool + cfg.batch_size - 1) / cfg.batch_size;

    run_agreement_phase(cfg, report.model, pair.source, split.train, steps_per_epoch, report);
    if (cfg.use_dir || cfg.use_ensemble) {
        run_disagreement_phase(cfg, report.model, split.train, cfg.epochs_disagree * steps_per_epoch, report);
    }
    if (cfg.use_ensemble) {
        run_ensemble_phase(cfg, report.model, split.train, cfg.epochs_ensemble * steps_per_epoch, report);
    }
    report.scores = evaluate(report.model, split.eval);
    return report;
}

Split target_split(const TrainConfig& cfg, const SceneDataset& target) {
    return sample_k_per_class(target, cfg.shots, stream_seed(cfg.seed, kSplitStream));
}

Scores evaluate(const ModelBundle& model, const SceneDataset& eval_split) {
    if (eval_split.size() == 0) throw DataError("evaluate: empty evaluation split");
    if (eval_split.classes != model.shape.classes_target) {
        throw DataError("evaluate: split has " + std::to_string(eval_split.classes) + " classes, model predicts " +
                        std::to_string(model.shape.classes_target));
    }
    const Matrix logits = predict_target(model, eval_split.spectra);
    ConfusionMatrix cm(eval_split.classes);
    for (std::size_t i = 0; i < logits.rows(); ++i) cm.accumulate(eval_split.labels[i], argmax(logits.row(i)));
    return {overall_accuracy(cm), average_accuracy(cm), cohen_kappa(cm)};
}

TrainConfig ablation_config(const TrainConfig& base, std::size_t index) {
    if (index > 4) throw ConfigError("ablation row index must be 0..4");
    TrainConfig c = base;
    c.use_gradvac = index >= 1;
    c.use_logitnorm = index >= 2;
    c.use_ensemble = index >= 3;
    c.use_dir = index >= 4;
    return c;
}

std::vector<AblationRow> ablate(const TrainConfig& cfg) {
    cfg.validate();
    static constexpr const char* kLabels[] = {"baseline", "+GradVac", "+LogitNorm", "+ensemble", "+DiR"};
    std::vector<AblationRow> rows;
    for (std::size_t i = 0; i < 5; ++i) {
        TrainConfig c = ablation_config(cfg, i);
        RunReport r = train(c);
        rows.push_back({kLabels[i], c, std::move(r)});
    }
    return rows;
}

double to_percent(double ratio) { return std::round(ratio * 10000.0) / 100.0; }

void write_metric_log(const RunReport& report, std::ostream& out) {
    using nlohmann::json;
    for (const auto& s : report.agree) {
        out << json{{"phase", "agree"},
                    {"step", s.step},
                    {"epoch", s.epoch},
                    {"phi_raw", s.phi_raw},
                    {"phi_post", s.phi_post},
                    {"alpha", s.alpha},
                    {"mag_sim", s.mag_sim},
                    {"loss_s", s.loss_s},
                    {"loss_t", s.loss_t},
                    {"norm_gs", s.norm_gs},
                    {"norm_gt", s.norm_gt},
                    {"gradvac_applied", s.gradvac_applied},
                    {"logitnorm_active", s.logitnorm_active},
                    {"logit_norm_min", s.logit_norm_min},
                    {"logit_norm_max", s.logit_norm_max}}
                   .dump()
            << '\n';
    }
    for (const auto& s : report.disagree) {
        out << json{{"phase", "disagree"}, {"step", s.step}, {"loss_ce", s.loss_ce}, {"dcor", s.dcor}}.dump() << '\n';
    }
    for (const auto& s : report.ensemble) {
        out << json{{"phase", "ensemble"},
                    {"step", s.step},
                    {"loss_ce", s.loss_ce},
                    {"e_en1", s.e_en1},
                    {"e_en2", s.e_en2},
                    {"e_en", ensemble_total(s.e_en1, s.e_en2)}}
                   .dump()
            << '\n';
    }
    out << json{{"oa", to_percent(report.scores.oa)},
                {"aa", to_percent(report.scores.aa)},
                {"kappa", to_percent(report.scores.kappa)}}
               .dump()
        << '\n';
}

void write_ablation_log(const std::vector<AblationRow>& rows, std::ostream& out) {
    using nlohmann::json;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << json{{"row", i},
                    {"label", r.label},
                    {"use_gradvac", r.config.use_gradvac},
                    {"use_logitnorm", r.config.use_logitnorm},
                    {"use_ensemble", r.config.use_ensemble},
                    {"use_dir", r.config.use_dir},
                    {"oa", to_percent(r.report.scores.oa)},
                    {"aa", to_percent(r.report.scores.aa)},
                    {"kappa", to_percent(r.report.scores.kappa)}}
                   .dump()
            << '\n';
    }
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream ss;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %7s %10s %9s %4s %8s %8s %8s\n", "row", "GradVac", "LogitNorm",
                  "ensemble", "DiR", "OA", "AA", "kappa");
    ss << line;
    auto mark = [](bool b) { return b ? "x" : "-"; };
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-12s %7s %10s %9s %4s %8.2f %8.2f %8.2f\n", r.label.c_str(),
                      mark(r.config.use_gradvac), mark(r.config.use_logitnorm), mark(r.config.use_ensemble),
                      mark(r.config.use_dir), to_percent(r.report.scores.oa), to_percent(r.report.scores.aa),
                      to_percent(r.report.scores.kappa));
        ss << line;
    }
    return ss.str();
}

}  // namespace adgkt
