#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adgkt/checkpoint.hpp"
#include "adgkt/config.hpp"
#include "adgkt/data.hpp"
#include "adgkt/train.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void print_scores(const adgkt::Scores& s) {
    std::cout << nlohmann::json{{"oa", adgkt::to_percent(s.oa)},
                                {"aa", adgkt::to_percent(s.aa)},
                                {"kappa", adgkt::to_percent(s.kappa)}}
                     .dump()
              << '\n';
}

int cmd_gen_data(const fs::path& config_path, const fs::path& out_dir) {
    const adgkt::TrainConfig cfg = adgkt::load_config(config_path);
    const adgkt::ScenePair pair = adgkt::generate_pair(cfg.synth);
    const adgkt::Split split = adgkt::target_split(cfg, pair.target);
    fs::create_directories(out_dir);
    adgkt::save_csv(pair.source, out_dir / "source.csv");
    adgkt::save_csv(pair.target, out_dir / "target.csv");
    adgkt::save_csv(split.train, out_dir / "target_train.csv");
    if (split.eval.size() > 0) adgkt::save_csv(split.eval, out_dir / "target_eval.csv");
    std::cout << "wrote " << pair.source.size() << " source and " << pair.target.size() << " target samples ("
              << split.train.size() << " train / " << split.eval.size() << " eval) to " << out_dir.string() << '\n';
    return 0;
}

int cmd_train(const fs::path& config_path, const fs::path& log_path, const fs::path& model_path) {
    const adgkt::TrainConfig cfg = adgkt::load_config(config_path);
    const adgkt::RunReport report = adgkt::train(cfg);
    auto log = open_output(log_path);
    adgkt::write_metric_log(report, log);
    if (!model_path.empty()) adgkt::save_checkpoint(report.model, model_path);
    print_scores(report.scores);
    return 0;
}

int cmd_ablate(const fs::path& config_path, const fs::path& log_path) {
    const adgkt::TrainConfig cfg = adgkt::load_config(config_path);
    const auto rows = adgkt::ablate(cfg);
    auto log = open_output(log_path);
    adgkt::write_ablation_log(rows, log);
    std::cout << adgkt::format_ablation_table(rows);
    return 0;
}

int cmd_eval(const fs::path& model_path, const fs::path& data_path) {
    const adgkt::ModelBundle model = adgkt::load_checkpoint(model_path);
    const adgkt::SceneDataset data = adgkt::load_csv(data_path);
    print_scores(adgkt::evaluate(model, data));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agreement-disagreement guided knowledge transfer on synthetic cross-scene spectra"};
    app.require_subcommand(1);

    std::string config, out_dir, log, model, data;

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic source/target scene pair as CSV");
    gen->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    gen->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Run the three-phase training loop");
    tr->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    tr->add_option("--log", log, "JSON-lines metric log")->required();
    tr->add_option("--model", model, "Write the trained model checkpoint here");

    auto* ab = app.add_subcommand("ablate", "Run the five-row component ladder");
    ab->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    ab->add_option("--log", log, "JSON-lines ablation log")->required();

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a target-scene CSV");
    ev->add_option("--model", model, "Model checkpoint")->required()->check(CLI::ExistingFile);
    ev->add_option("--data", data, "Target scene CSV")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(config, out_dir);
        if (tr->parsed()) return cmd_train(config, log, model);
        if (ab->parsed()) return cmd_ablate(config, log);
        if (ev->parsed()) return cmd_eval(model, data);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
