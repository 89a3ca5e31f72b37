#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "adgkt/data.hpp"
#include "adgkt/model.hpp"

namespace adgkt {

struct TrainConfig {
    std::uint64_t seed = 0;

    double lr = 5e-4;
    double weight_decay = 5e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    std::size_t batch_size = 64;
    std::size_t epochs_agree = 40;
    std::size_t epochs_disagree = 20;
    std::size_t epochs_ensemble = 20;
    std::size_t shots = 10;

    double beta = 0.1;
    double tau = 2.0;
    double temp_agree = 1.0;
    double temp_disagree = 0.05;
    bool kd_t2_scaling = true;
    double phi_mag_threshold = 1.0;

    double source_weight = 1.0;
    double target_weight = 1.0;
    double dcor_weight = 1.0;
    double ensemble_weight = 1.0;

    bool use_gradvac = true;
    bool use_logitnorm = true;
    bool use_ensemble = true;
    bool use_dir = true;

    std::size_t feat_dim = 32;
    std::size_t hidden_dim = 64;
    std::size_t enc_dim = 32;

    SynthConfig synth;

    /// Throws ConfigError on any invalid value.
    void validate() const;

    ArchConfig arch() const { return {feat_dim, hidden_dim, enc_dim}; }
    AdamConfig adam() const { return {lr, adam_beta1, adam_beta2, weight_decay, 1e-8}; }
};

/// Parses a config object. Missing keys keep their defaults; unknown keys
/// (top level or inside "synth") raise ConfigError.
TrainConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig load_config(const std::filesystem::path& path);

}  // namespace adgkt
