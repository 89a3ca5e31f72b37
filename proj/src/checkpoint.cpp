#include "adgkt/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "adgkt/error.hpp"

namespace adgkt {

namespace {

constexpr const char* kFormat = "adgkt-checkpoint";
constexpr int kVersion = 1;

void put_le(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> bytes{};
    for (auto& b : bytes) {
        b = static_cast<char>(bits & 0xffU);
        bits >>= 8;
    }
    out.write(bytes.data(), bytes.size());
}

double get_le(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw DataError("checkpoint: truncated parameter block");
    }
    std::uint64_t bits = 0;
    for (std::size_t i = bytes.size(); i-- > 0;) bits = (bits << 8) | bytes[i];
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_checkpoint(const ModelBundle& model, std::ostream& out) {
    using nlohmann::json;
    json components = json::array();
    std::size_t total = 0;
    for (const auto& [name, mlp] : model.components()) {
        json layers = json::array();
        for (const auto& l : mlp->params().layers()) layers.push_back({{"in", l.in_dim()}, {"out", l.out_dim()}});
        components.push_back({{"name", name}, {"layers", layers}});
        total += mlp->params().parameter_count();
    }
    const json header{
        {"format", kFormat},
        {"version", kVersion},
        {"shape",
         {{"bands_source", model.shape.bands_source},
          {"bands_target", model.shape.bands_target},
          {"classes_source", model.shape.classes_source},
          {"classes_target", model.shape.classes_target}}},
        {"arch",
         {{"feat_dim", model.arch.feat_dim}, {"hidden_dim", model.arch.hidden_dim}, {"enc_dim", model.arch.enc_dim}}},
        {"ensemble_ready", model.ensemble_ready},
        {"components", components},
        {"values", total},
    };
    out << header.dump() << '\n';
    for (const auto& [name, mlp] : model.components())
        for (double v : mlp->params().flatten()) put_le(out, v);
}

ModelBundle read_checkpoint(std::istream& in) {
    using nlohmann::json;
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: missing header");
    json h;
    try {
        h = json::parse(line);
        if (h.at("format") != kFormat || h.at("version") != kVersion) {
            throw DataError("checkpoint: unsupported format or version");
        }
        const auto& s = h.at("shape");
        const auto& a = h.at("arch");
        const SceneShape shape{s.at("bands_source"), s.at("bands_target"), s.at("classes_source"),
                               s.at("classes_target")};
        const ArchConfig arch{a.at("feat_dim"), a.at("hidden_dim"), a.at("enc_dim")};
        ModelBundle model(shape, arch, 0);
        model.ensemble_ready = h.at("ensemble_ready");

        auto comps = model.components();
        const auto& hc = h.at("components");
        if (hc.size() != comps.size()) throw DataError("checkpoint: component count mismatch");
        for (std::size_t c = 0; c < comps.size(); ++c) {
            auto& [name, mlp] = comps[c];
            const auto& entry = hc[c];
            if (entry.at("name") != name) throw DataError("checkpoint: expected component " + name);
            auto layers = mlp->params().layers();
            const auto& hl = entry.at("layers");
            if (hl.size() != layers.size()) throw DataError("checkpoint: layer count mismatch in " + name);
            for (std::size_t i = 0; i < layers.size(); ++i) {
                if (hl[i].at("in") != layers[i].in_dim() || hl[i].at("out") != layers[i].out_dim()) {
                    throw DataError("checkpoint: layer shape mismatch in " + name);
                }
            }
            std::vector<double> values(mlp->params().parameter_count());
            for (double& v : values) v = get_le(in);
            mlp->params().unflatten(values);
        }
        if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint: trailing bytes");
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: malformed header: ") + e.what());
    }
}

void save_checkpoint(const ModelBundle& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_checkpoint(model, out);
}

ModelBundle load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_checkpoint(in);
}

}  // namespace adgkt
