#include "adgkt/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "adgkt/error.hpp"

namespace adgkt {

using nlohmann::json;

void TrainConfig::validate() const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be > 0");
    };
    positive(lr, "lr");
    positive(tau, "tau");
    positive(temp_agree, "temp_agree");
    positive(temp_disagree, "temp_disagree");
    positive(phi_mag_threshold, "phi_mag_threshold");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0, 1)");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (shots == 0) throw ConfigError("shots must be >= 1");
    if (epochs_agree == 0) throw ConfigError("epochs_agree must be >= 1");
    if (feat_dim == 0 || hidden_dim == 0 || enc_dim == 0) throw ConfigError("architecture dims must be >= 1");
    for (auto [v, key] : {std::pair{source_weight, "source_weight"}, std::pair{target_weight, "target_weight"},
                          std::pair{dcor_weight, "dcor_weight"}, std::pair{ensemble_weight, "ensemble_weight"}}) {
        if (!(v >= 0.0)) throw ConfigError(std::string(key) + " must be >= 0");
    }
    synth.validate();
    if (synth.samples_per_class_target < shots) {
        throw ConfigError("synth.samples_per_class_target must be >= shots");
    }
}

namespace {

template <typename T>
void read_into(const json& v, T& out, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(key + " must be a boolean");
            out = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
                throw ConfigError(key + " must be a non-negative integer");
            }
            out = v.get<T>();
        } else {
            if (!v.is_number()) throw ConfigError(key + " must be a number");
            out = v.get<T>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

using Setter = std::function<void(const json&)>;

template <typename T>
std::pair<const std::string, Setter> field(const std::string& key, T& ref) {
    return {key, [&ref, key](const json& v) { read_into(v, ref, key); }};
}

void apply(const json& j, const std::map<std::string, Setter>& fields, const std::string& scope) {
    if (!j.is_object()) throw ConfigError(scope + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError("unknown config key '" + scope + key + "'");
        it->second(value);
    }
}

}  // namespace

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    SynthConfig& s = c.synth;
    const std::map<std::string, Setter> synth_fields{
        field("bands_source", s.bands_source),
        field("bands_target", s.bands_target),
        field("classes_source", s.classes_source),
        field("classes_target", s.classes_target),
        field("shared_classes", s.shared_classes),
        field("samples_per_class_source", s.samples_per_class_source),
        field("samples_per_class_target", s.samples_per_class_target),
        field("latent_dim", s.latent_dim),
        field("class_separation", s.class_separation),
        field("noise_sigma", s.noise_sigma),
        field("conflict_strength", s.conflict_strength),
        field("seed", s.seed),
    };
    const std::map<std::string, Setter> fields{
        field("seed", c.seed),
        field("lr", c.lr),
        field("weight_decay", c.weight_decay),
        field("adam_beta1", c.adam_beta1),
        field("adam_beta2", c.adam_beta2),
        field("batch_size", c.batch_size),
        field("epochs_agree", c.epochs_agree),
        field("epochs_disagree", c.epochs_disagree),
        field("epochs_ensemble", c.epochs_ensemble),
        field("shots", c.shots),
        field("beta", c.beta),
        field("tau", c.tau),
        field("temp_agree", c.temp_agree),
        field("temp_disagree", c.temp_disagree),
        field("kd_t2_scaling", c.kd_t2_scaling),
        field("phi_mag_threshold", c.phi_mag_threshold),
        field("source_weight", c.source_weight),
        field("target_weight", c.target_weight),
        field("dcor_weight", c.dcor_weight),
        field("ensemble_weight", c.ensemble_weight),
        field("use_gradvac", c.use_gradvac),
        field("use_logitnorm", c.use_logitnorm),
        field("use_ensemble", c.use_ensemble),
        field("use_dir", c.use_dir),
        field("feat_dim", c.feat_dim),
        field("hidden_dim", c.hidden_dim),
        field("enc_dim", c.enc_dim),
        {"synth", [&](const json& v) { apply(v, synth_fields, "synth."); }},
    };
    apply(j, fields, "");
    c.validate();
    return c;
}

json config_to_json(const TrainConfig& c) {
    const SynthConfig& s = c.synth;
    return json{
        {"seed", c.seed},
        {"lr", c.lr},
        {"weight_decay", c.weight_decay},
        {"adam_beta1", c.adam_beta1},
        {"adam_beta2", c.adam_beta2},
        {"batch_size", c.batch_size},
        {"epochs_agree", c.epochs_agree},
        {"epochs_disagree", c.epochs_disagree},
        {"epochs_ensemble", c.epochs_ensemble},
        {"shots", c.shots},
        {"beta", c.beta},
        {"tau", c.tau},
        {"temp_agree", c.temp_agree},
        {"temp_disagree", c.temp_disagree},
        {"kd_t2_scaling", c.kd_t2_scaling},
        {"phi_mag_threshold", c.phi_mag_threshold},
        {"source_weight", c.source_weight},
        {"target_weight", c.target_weight},
        {"dcor_weight", c.dcor_weight},
        {"ensemble_weight", c.ensemble_weight},
        {"use_gradvac", c.use_gradvac},
        {"use_logitnorm", c.use_logitnorm},
        {"use_ensemble", c.use_ensemble},
        {"use_dir", c.use_dir},
        {"feat_dim", c.feat_dim},
        {"hidden_dim", c.hidden_dim},
        {"enc_dim", c.enc_dim},
        {"synth",
         {{"bands_source", s.bands_source},
          {"bands_target", s.bands_target},
          {"classes_source", s.classes_source},
          {"classes_target", s.classes_target},
          {"shared_classes", s.shared_classes},
          {"samples_per_class_source", s.samples_per_class_source},
          {"samples_per_class_target", s.samples_per_class_target},
          {"latent_dim", s.latent_dim},
          {"class_separation", s.class_separation},
          {"noise_sigma", s.noise_sigma},
          {"conflict_strength", s.conflict_strength},
          {"seed", s.seed}}},
    };
}

TrainConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

}  // namespace adgkt
