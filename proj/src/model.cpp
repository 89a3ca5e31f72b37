#include "adgkt/model.hpp"

#include <algorithm>
#include <limits>

#include "adgkt/error.hpp"

namespace adgkt {

namespace {

void check_input(const Matrix& x, std::size_t bands, const char* what) {
    if (x.cols() != bands) {
        throw DimensionError(std::string(what) + ": input has " + std::to_string(x.cols()) + " bands, expected " +
                             std::to_string(bands));
    }
}

Mlp make_mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out) {
    return Mlp(name, {in, hidden, out});
}

struct Pass {
    Mlp::Cache extractor, encoder, head;
    Matrix logits;
};

Pass run_agreement_branch(const Mlp& extractor, const Mlp& encoder, const Mlp& head, const Matrix& x) {
    Pass p;
    const Matrix f = extractor.forward(x, p.extractor);
    const Matrix e = encoder.forward(f, p.encoder);
    p.logits = head.forward(e, p.head);
    return p;
}

}  // namespace

ModelBundle::ModelBundle(const SceneShape& s, const ArchConfig& a, std::uint64_t seed) : shape(s), arch(a) {
    if (s.bands_source == 0 || s.bands_target == 0 || s.classes_source < 2 || s.classes_target < 2) {
        throw ConfigError("ModelBundle: scenes need >= 1 band and >= 2 classes");
    }
    if (a.feat_dim == 0 || a.hidden_dim == 0 || a.enc_dim == 0) throw ConfigError("ModelBundle: zero dimension");

    source_extractor = make_mlp("F_s", s.bands_source, a.hidden_dim, a.feat_dim);
    target_extractor = make_mlp("F_t", s.bands_target, a.hidden_dim, a.feat_dim);
    shared_encoder = make_mlp("G", a.feat_dim, a.hidden_dim, a.enc_dim);
    source_head = Mlp("T_s", {a.enc_dim, s.classes_source});
    target_head = Mlp("T_t", {a.enc_dim, s.classes_target});
    private_extractor = make_mlp("F'_t", s.bands_target, a.hidden_dim, a.feat_dim);
    private_encoder = make_mlp("G'", a.feat_dim, a.hidden_dim, a.enc_dim);
    private_head = Mlp("T'_t", {a.enc_dim, s.classes_target});
    ensemble_encoder = make_mlp("G_en", a.feat_dim, a.hidden_dim, a.enc_dim);
    ensemble_head = Mlp("T_en", {a.enc_dim, s.classes_target});

    Rng root(seed);
    std::uint64_t salt = 0;
    for (auto& [name, mlp] : components()) {
        Rng rng = root.fork(++salt);
        mlp->params().init_glorot(rng);
    }
}

std::vector<std::pair<std::string, Mlp*>> ModelBundle::components() {
    return {{"F_s", &source_extractor},   {"F_t", &target_extractor},  {"G", &shared_encoder},
            {"T_s", &source_head},        {"T_t", &target_head},       {"F'_t", &private_extractor},
            {"G'", &private_encoder},     {"T'_t", &private_head},     {"G_en", &ensemble_encoder},
            {"T_en", &ensemble_head}};
}

std::vector<std::pair<std::string, const Mlp*>> ModelBundle::components() const {
    auto mut = const_cast<ModelBundle*>(this)->components();
    std::vector<std::pair<std::string, const Mlp*>> out;
    out.reserve(mut.size());
    for (auto& [name, mlp] : mut) out.emplace_back(name, mlp);
    return out;
}

Matrix forward_source(const ModelBundle& m, const Matrix& x_s) {
    check_input(x_s, m.shape.bands_source, "forward_source");
    return m.source_head.forward(m.shared_encoder.forward(m.source_extractor.forward(x_s)));
}

Matrix forward_target_agree(const ModelBundle& m, const Matrix& x_t) {
    return m.target_head.forward(shared_target_features(m, x_t));
}

Matrix shared_target_features(const ModelBundle& m, const Matrix& x_t) {
    check_input(x_t, m.shape.bands_target, "forward_target_agree");
    return m.shared_encoder.forward(m.target_extractor.forward(x_t));
}

DisagreeOutput forward_target_disagree(const ModelBundle& m, const Matrix& x_t) {
    check_input(x_t, m.shape.bands_target, "forward_target_disagree");
    DisagreeOutput out;
    out.features = m.private_encoder.forward(m.private_extractor.forward(x_t));
    out.logits = m.private_head.forward(out.features);
    return out;
}

Matrix forward_ensemble(const ModelBundle& m, const Matrix& x_t) {
    check_input(x_t, m.shape.bands_target, "forward_ensemble");
    return m.ensemble_head.forward(m.ensemble_encoder.forward(m.target_extractor.forward(x_t)));
}

Matrix predict_target(const ModelBundle& m, const Matrix& x_t) {
    return m.ensemble_ready ? forward_ensemble(m, x_t) : forward_target_agree(m, x_t);
}

SharedGradients shared_gradients(ModelBundle& m, const Matrix& x_s, Labels y_s, const Matrix& x_t, Labels y_t,
                                 const TaskLossConfig& loss_cfg) {
    if (x_s.rows() == 0 || x_t.rows() == 0) throw DataError("shared_gradients: empty batch");
    check_input(x_s, m.shape.bands_source, "shared_gradients(source)");
    check_input(x_t, m.shape.bands_target, "shared_gradients(target)");

    SharedGradients out;
    out.logit_norm_min = std::numeric_limits<double>::infinity();
    out.logit_norm_max = 0.0;

    auto task = [&](Mlp& extractor, Mlp& head, const Matrix& x, Labels y, double& loss) {
        extractor.params().zero_grad();
        head.params().zero_grad();
        m.shared_encoder.params().zero_grad();

        Pass p = run_agreement_branch(extractor, m.shared_encoder, head, x);
        LossGrad lg = loss_cfg.use_logitnorm ? logitnorm_ce(p.logits, y, loss_cfg.logitnorm)
                                             : softmax_cross_entropy(p.logits, y);
        const Matrix used = loss_cfg.use_logitnorm ? logitnorm_rows(p.logits, loss_cfg.logitnorm) : p.logits;
        for (std::size_t i = 0; i < used.rows(); ++i) {
            const double r = norm(used.row(i));
            out.logit_norm_min = std::min(out.logit_norm_min, r);
            out.logit_norm_max = std::max(out.logit_norm_max, r);
        }
        loss = lg.loss;

        const Matrix d_enc = head.backward(p.head, lg.grad);
        const Matrix d_feat = m.shared_encoder.backward(p.encoder, d_enc);
        extractor.backward(p.extractor, d_feat);

        std::vector<double> g = m.shared_encoder.params().flatten_grad();
        m.shared_encoder.params().zero_grad();
        return g;
    };

    out.g_s = task(m.source_extractor, m.source_head, x_s, y_s, out.loss_s);
    out.g_t = task(m.target_extractor, m.target_head, x_t, y_t, out.loss_t);
    return out;
}

}  // namespace adgkt
