#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adgkt/checkpoint.hpp"
#include "adgkt/config.hpp"
#include "adgkt/error.hpp"
#include "adgkt/train.hpp"

using namespace adgkt;
using nlohmann::json;

namespace {

TrainConfig small_config() {
    TrainConfig c;
    c.epochs_agree = 3;
    c.epochs_disagree = 2;
    c.epochs_ensemble = 2;
    c.batch_size = 32;
    c.hidden_dim = 16;
    c.feat_dim = 8;
    c.enc_dim = 8;
    c.synth.samples_per_class_source = 30;
    c.synth.samples_per_class_target = 20;
    return c;
}

std::string metric_log(const RunReport& r) {
    std::ostringstream out;
    write_metric_log(r, out);
    return out.str();
}

std::string agree_lines(const RunReport& r) {
    RunReport only;
    only.agree = r.agree;
    return metric_log(only);
}

// Bundle whose ensemble path is the identity on non-negative inputs, so the
// predicted class is the argmax of the input row.
ModelBundle identity_model(std::size_t classes) {
    ModelBundle m({classes, classes, 2, classes}, {classes, classes, classes}, 0);
    for (Mlp* part : {&m.target_extractor, &m.ensemble_encoder, &m.ensemble_head}) {
        for (auto& l : part->params().layers()) {
            l.weight.fill(0.0);
            for (std::size_t k = 0; k < classes; ++k) l.weight(k, k) = 1.0;
            l.bias.fill(0.0);
        }
    }
    m.ensemble_ready = true;
    return m;
}

SceneDataset one_hot_split(std::size_t classes, const std::vector<std::size_t>& truth,
                           const std::vector<std::size_t>& predicted) {
    SceneDataset d{"fixture", classes, classes, Matrix(truth.size(), classes), truth};
    for (std::size_t i = 0; i < truth.size(); ++i) d.spectra(i, predicted[i]) = 1.0;
    return d;
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("missing keys keep defaults") {
        const TrainConfig c = config_from_json(json{{"seed", 5}, {"synth", {{"noise_sigma", 0.2}}}});
        CHECK(c.seed == 5);
        CHECK(c.lr == 5e-4);
        CHECK(c.batch_size == 64);
        CHECK(c.tau == 2.0);
        CHECK(c.synth.noise_sigma == 0.2);
        CHECK(c.synth.bands_source == 48);
    }
    SUBCASE("round trip") {
        TrainConfig c = small_config();
        c.use_dir = false;
        c.synth.conflict_strength = 0.25;
        const TrainConfig back = config_from_json(config_to_json(c));
        CHECK(config_to_json(back) == config_to_json(c));
    }
    SUBCASE("unknown keys, wrong types and bad values") {
        CHECK_THROWS_AS(config_from_json(json{{"learning_rate", 0.1}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"synth", {{"bands", 3}}}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"lr", "fast"}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"use_dir", 1}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"batch_size", -4}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"lr", 0.0}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"tau", -1.0}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"temp_disagree", 0.0}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json{{"beta", 1.5}}), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
        CHECK_THROWS_AS(load_config("/nonexistent/adgkt.json"), ConfigError);
    }
    SUBCASE("train rejects invalid configs up front") {
        TrainConfig c = small_config();
        c.batch_size = 0;
        CHECK_THROWS_AS(train(c), ConfigError);
        c = small_config();
        c.batch_size = 1;
        CHECK_THROWS_AS(train(c), ConfigError);  // DiR needs two samples per batch
        c.use_dir = false;
        c.use_ensemble = false;
        c.epochs_agree = 1;
        CHECK_NOTHROW(train(c));
    }
}

TEST_CASE("train is deterministic and the log is well formed") {
    const TrainConfig c = small_config();
    const RunReport a = train(c), b = train(c);
    const std::string log = metric_log(a);
    CHECK(log == metric_log(b));

    std::istringstream lines(log);
    std::string line, last;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        last = line;
        ++count;
    }
    CHECK(count == a.agree.size() + a.disagree.size() + a.ensemble.size() + 1);
    const json final = json::parse(last);
    CHECK(final.size() == 3);
    CHECK(final.at("oa").get<double>() == to_percent(a.scores.oa));
    CHECK(final.at("oa").get<double>() >= 0.0);
    CHECK(final.at("oa").get<double>() <= 100.0);

    const json first = json::parse(log.substr(0, log.find('\n')));
    for (const char* key : {"phase", "step", "phi_raw", "phi_post", "alpha", "mag_sim", "loss_s", "loss_t"})
        CHECK(first.contains(key));

    TrainConfig other = c;
    other.seed = 1;
    CHECK_FALSE(metric_log(train(other)) == log);
}

TEST_CASE("agreement diagnostics") {
    TrainConfig c = small_config();
    c.use_logitnorm = false;
    c.use_ensemble = false;
    c.use_dir = false;
    const RunReport r = train(c);
    REQUIRE_FALSE(r.agree.empty());

    double raw = 0.0, post = 0.0, alpha = 0.0;
    std::size_t fired = 0;
    for (std::size_t i = 0; i < r.agree.size(); ++i) {
        const AgreeStepLog& s = r.agree[i];
        CHECK(s.alpha == doctest::Approx(alpha).epsilon(1e-15));
        if (s.gradvac_applied) {
            ++fired;
            CHECK(std::abs(s.phi_post - s.alpha) <= 1e-9);
        } else {
            CHECK(s.phi_post == s.phi_raw);
        }
        CHECK_FALSE(s.logitnorm_active);
        alpha = std::clamp((1.0 - c.beta) * alpha + c.beta * s.phi_raw, -1.0 + 1e-6, 1.0 - 1e-6);
        raw += s.phi_raw;
        post += s.phi_post;
    }
    CHECK(fired > 0);
    CHECK(post >= raw);
    CHECK(r.disagree.empty());
    CHECK(r.ensemble.empty());
    CHECK_FALSE(r.model.ensemble_ready);
}

TEST_CASE("LogitNorm rows have norm 1/tau") {
    TrainConfig c = small_config();
    c.tau = 2.5;
    c.use_ensemble = false;
    c.use_dir = false;
    for (const AgreeStepLog& s : train(c).agree) {
        CHECK(s.logitnorm_active);
        CHECK(std::abs(s.logit_norm_min - 1.0 / c.tau) <= 1e-9);
        CHECK(std::abs(s.logit_norm_max - 1.0 / c.tau) <= 1e-9);
    }
}

TEST_CASE("toggling DiR leaves the agreement phase bit-identical") {
    TrainConfig with = small_config();
    TrainConfig without = with;
    without.use_dir = false;
    const RunReport a = train(with), b = train(without);
    CHECK(agree_lines(a) == agree_lines(b));
    CHECK(a.disagree.size() == b.disagree.size());
    CHECK(a.disagree.front().dcor > 0.0);
    CHECK(b.disagree.front().dcor == 0.0);
    CHECK(a.model.ensemble_ready);
}

TEST_CASE("ablation ladder") {
    TrainConfig c = small_config();
    c.epochs_agree = 2;
    c.epochs_disagree = 1;
    c.epochs_ensemble = 1;
    const auto rows = ablate(c);
    REQUIRE(rows.size() == 5);
    const bool expect[5][4] = {{false, false, false, false},
                               {true, false, false, false},
                               {true, true, false, false},
                               {true, true, true, false},
                               {true, true, true, true}};
    for (std::size_t i = 0; i < 5; ++i) {
        const TrainConfig& rc = rows[i].config;
        CHECK(rc.use_gradvac == expect[i][0]);
        CHECK(rc.use_logitnorm == expect[i][1]);
        CHECK(rc.use_ensemble == expect[i][2]);
        CHECK(rc.use_dir == expect[i][3]);
        CHECK(rows[i].report.scores.oa >= 0.0);
        CHECK(rows[i].report.scores.oa <= 1.0);
    }
    CHECK(metric_log(rows[0].report) == metric_log(train(ablation_config(c, 0))));
    CHECK(metric_log(rows[4].report) == metric_log(train(ablation_config(c, 4))));
    CHECK_THROWS_AS(ablation_config(c, 5), ConfigError);

    std::ostringstream log;
    write_ablation_log(rows, log);
    const std::string text = log.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    const std::string table = format_ablation_table(rows);
    CHECK(table.find("+DiR") != std::string::npos);
    CHECK(table.find("baseline") != std::string::npos);
}

TEST_CASE("evaluate") {
    const ModelBundle m = identity_model(3);
    SUBCASE("perfect classifier") {
        const Scores s = evaluate(m, one_hot_split(3, {0, 1, 2, 2}, {0, 1, 2, 2}));
        CHECK(s.oa == 1.0);
        CHECK(s.aa == 1.0);
        CHECK(s.kappa == 1.0);
    }
    SUBCASE("constant classifier") {
        const Scores s = evaluate(m, one_hot_split(3, {0, 1, 2, 2, 1}, {0, 0, 0, 0, 0}));
        CHECK(s.aa == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(s.kappa == 0.0);
    }
    SUBCASE("hand-built confusion matrix") {
        // rows [1,1,0] [0,2,0] [1,0,1]: OA 4/6, AA (1/2+1+1/2)/3, p_e 12/36, kappa 1/2
        const Scores s = evaluate(m, one_hot_split(3, {0, 0, 1, 1, 2, 2}, {0, 1, 1, 1, 2, 0}));
        CHECK(s.oa == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
        CHECK(s.aa == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(s.kappa == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(evaluate(m, SceneDataset{"e", 3, 3, Matrix(0, 3), {}}), DataError);
        CHECK_THROWS_AS(evaluate(m, one_hot_split(4, {0}, {0})), std::exception);
    }
    CHECK(to_percent(2.0 / 3.0) == 66.67);
}

TEST_CASE("checkpoint round trip") {
    TrainConfig c = small_config();
    c.epochs_agree = 1;
    const RunReport r = train(c);
    std::stringstream buf;
    write_checkpoint(r.model, buf);
    const std::string bytes = buf.str();

    std::istringstream in(bytes);
    const ModelBundle back = read_checkpoint(in);
    CHECK(back.ensemble_ready == r.model.ensemble_ready);
    const auto a = r.model.components(), b = back.components();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second->params().flatten() == b[i].second->params().flatten());

    std::stringstream again;
    write_checkpoint(back, again);
    CHECK(again.str() == bytes);

    std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint(truncated), DataError);
    std::istringstream trailing(bytes + "x");
    CHECK_THROWS_AS(read_checkpoint(trailing), DataError);
    std::istringstream garbage("{not json\n");
    CHECK_THROWS_AS(read_checkpoint(garbage), DataError);
}
