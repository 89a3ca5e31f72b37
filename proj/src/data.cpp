#include "adgkt/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "adgkt/error.hpp"
#include "adgkt/rng.hpp"

namespace adgkt {

void SceneDataset::validate(bool require_all_classes) const {
    if (spectra.rows() != labels.size() || spectra.cols() != bands) {
        throw DataError("scene '" + name + "': spectra shape does not match bands/labels");
    }
    if (!spectra.all_finite()) throw DataError("scene '" + name + "': non-finite spectra");
    for (std::size_t y : labels) {
        if (y >= classes) throw IndexError("scene '" + name + "': label " + std::to_string(y) + " out of range");
    }
    if (require_all_classes) {
        const auto counts = class_counts();
        for (std::size_t k = 0; k < counts.size(); ++k)
            if (counts[k] == 0) throw DataError("scene '" + name + "': class " + std::to_string(k) + " has no samples");
    }
}

SceneDataset SceneDataset::subset(std::span<const std::size_t> indices) const {
    SceneDataset out{name, bands, classes, gather_rows(spectra, indices), {}};
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(labels[i]);
    return out;
}

std::vector<std::size_t> SceneDataset::class_counts() const {
    std::vector<std::size_t> counts(classes, 0);
    for (std::size_t y : labels)
        if (y < classes) ++counts[y];
    return counts;
}

void SynthConfig::validate() const {
    if (bands_source == 0 || bands_target == 0) throw ConfigError("synth: band counts must be >= 1");
    if (classes_source < 2 || classes_target < 2) throw ConfigError("synth: class counts must be >= 2");
    if (shared_classes > classes_source || shared_classes > classes_target) {
        throw ConfigError("synth: shared_classes exceeds a scene's class count");
    }
    if (samples_per_class_source == 0 || samples_per_class_target == 0) {
        throw ConfigError("synth: samples per class must be >= 1");
    }
    if (latent_dim == 0) throw ConfigError("synth: latent_dim must be >= 1");
    if (!(class_separation > 0.0)) throw ConfigError("synth: class_separation must be > 0");
    if (!(noise_sigma >= 0.0)) throw ConfigError("synth: noise_sigma must be >= 0");
    if (!(conflict_strength >= 0.0 && conflict_strength <= 1.0)) {
        throw ConfigError("synth: conflict_strength must lie in [0, 1]");
    }
}

namespace {

std::vector<double> random_prototype(Rng& rng, std::size_t dim, double scale) {
    std::vector<double> p(dim);
    for (double& v : p) v = scale * rng.normal();
    return p;
}

// Bands x latent map with N(0, 1/latent) entries.
Matrix random_map(Rng& rng, std::size_t bands, std::size_t latent) {
    Matrix m(bands, latent);
    const double s = 1.0 / std::sqrt(static_cast<double>(latent));
    for (double& v : m.values()) v = s * rng.normal();
    return m;
}

// Linear interpolation of map rows onto a coarser or finer band grid.
Matrix resample_bands(const Matrix& m, std::size_t bands) {
    Matrix out(bands, m.cols());
    const std::size_t src = m.rows();
    for (std::size_t b = 0; b < bands; ++b) {
        const double pos = bands == 1 ? 0.0
                                      : static_cast<double>(b) * static_cast<double>(src - 1) /
                                            static_cast<double>(bands - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, src - 1);
        const double w = pos - static_cast<double>(lo);
        for (std::size_t l = 0; l < m.cols(); ++l) out(b, l) = (1.0 - w) * m(lo, l) + w * m(hi, l);
    }
    return out;
}

// Bands x latent map with orthonormal columns (Gram-Schmidt), rescaled to the
// Frobenius norm of `reference`. Needs bands >= latent for full rank; extra
// columns beyond the band count stay zero.
Matrix orthonormal_map(Rng& rng, const Matrix& reference) {
    const std::size_t bands = reference.rows();
    const std::size_t latent = reference.cols();
    Matrix q(bands, latent);
    for (std::size_t c = 0; c < latent && c < bands; ++c) {
        std::vector<double> v(bands);
        for (double& x : v) x = rng.normal();
        for (std::size_t prev = 0; prev < c; ++prev) {
            double d = 0.0;
            for (std::size_t b = 0; b < bands; ++b) d += v[b] * q(b, prev);
            for (std::size_t b = 0; b < bands; ++b) v[b] -= d * q(b, prev);
        }
        const double n = norm(v);
        for (std::size_t b = 0; b < bands; ++b) q(b, c) = v[b] / n;
    }
    const double ref_norm = norm(reference.values());
    const double q_norm = norm(q.values());
    if (q_norm > 0.0) q *= ref_norm / q_norm;
    return q;
}

SceneDataset sample_scene(Rng& rng, const std::string& name, const Matrix& map,
                          const std::vector<std::vector<double>>& prototypes, std::size_t per_class, double sigma,
                          double gain) {
    const std::size_t bands = map.rows();
    const std::size_t latent = map.cols();
    SceneDataset ds{name, bands, prototypes.size(), Matrix(prototypes.size() * per_class, bands), {}};
    ds.labels.reserve(prototypes.size() * per_class);
    std::vector<double> z(latent);
    std::size_t row = 0;
    for (std::size_t k = 0; k < prototypes.size(); ++k) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            for (std::size_t l = 0; l < latent; ++l) z[l] = prototypes[k][l] + sigma * rng.normal();
            auto out = ds.spectra.row(row);
            for (std::size_t b = 0; b < bands; ++b) {
                double v = 0.0;
                for (std::size_t l = 0; l < latent; ++l) v += map(b, l) * z[l];
                out[b] = gain * v;
            }
            ds.labels.push_back(k);
        }
    }
    return ds;
}

}  // namespace

ScenePair generate_pair(const SynthConfig& cfg) {
    cfg.validate();
    Rng root(cfg.seed);
    Rng proto_rng = root.fork(1);
    Rng map_rng = root.fork(2);
    Rng source_rng = root.fork(3);
    Rng target_rng = root.fork(4);

    const std::size_t latent = cfg.latent_dim;
    const double sep = cfg.class_separation;

    std::vector<std::vector<double>> source_protos, target_protos;
    for (std::size_t k = 0; k < cfg.shared_classes; ++k) {
        auto p = random_prototype(proto_rng, latent, sep);
        source_protos.push_back(p);
        target_protos.push_back(std::move(p));
    }
    for (std::size_t k = cfg.shared_classes; k < cfg.classes_source; ++k)
        source_protos.push_back(random_prototype(proto_rng, latent, sep));
    for (std::size_t k = cfg.shared_classes; k < cfg.classes_target; ++k)
        target_protos.push_back(random_prototype(proto_rng, latent, sep));

    const Matrix source_map = random_map(map_rng, cfg.bands_source, latent);
    const Matrix resampled = resample_bands(source_map, cfg.bands_target);
    const Matrix rotated = orthonormal_map(map_rng, resampled);
    const double c = cfg.conflict_strength;
    const Matrix target_map = resampled * (1.0 - c) + rotated * c;

    // Unit-scale spectra regardless of separation/noise settings.
    const double gain = 1.0 / std::sqrt(sep * sep + cfg.noise_sigma * cfg.noise_sigma);

    ScenePair pair{
        sample_scene(source_rng, "source", source_map, source_protos, cfg.samples_per_class_source, cfg.noise_sigma,
                     gain),
        sample_scene(target_rng, "target", target_map, target_protos, cfg.samples_per_class_target, cfg.noise_sigma,
                     gain)};
    pair.source.validate();
    pair.target.validate();
    return pair;
}

Split sample_k_per_class(const SceneDataset& ds, std::size_t k, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(ds.classes);
    for (std::size_t i = 0; i < ds.size(); ++i) by_class.at(ds.labels[i]).push_back(i);

    Rng rng(seed);
    std::vector<std::size_t> train_idx, eval_idx;
    for (std::size_t c = 0; c < ds.classes; ++c) {
        const auto& members = by_class[c];
        if (members.size() < k) {
            throw DataError("sample_k_per_class: class " + std::to_string(c) + " has " +
                            std::to_string(members.size()) + " samples, need " + std::to_string(k));
        }
        const auto order = rng.permutation(members.size());
        for (std::size_t j = 0; j < order.size(); ++j) (j < k ? train_idx : eval_idx).push_back(members[order[j]]);
    }
    return {ds.subset(train_idx), ds.subset(eval_idx)};
}

void write_csv(const SceneDataset& ds, std::ostream& out) {
    out << "# scene=" << ds.name << " bands=" << ds.bands << " classes=" << ds.classes << '\n';
    char buf[32];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.labels[i];
        for (double v : ds.spectra.row(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& value) {
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc{} && ptr == end;
}

std::string header_value(const std::string& header, const std::string& key, std::size_t line) {
    std::istringstream ss(header.substr(1));
    std::string tok;
    while (ss >> tok) {
        if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
    }
    throw ParseError(line, "header is missing '" + key + "='");
}

}  // namespace

SceneDataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#') {
        throw ParseError(1, "expected header '# scene=<name> bands=<B> classes=<C>'");
    }
    SceneDataset ds;
    ds.name = header_value(line, "scene", 1);
    if (!parse_number(header_value(line, "bands", 1), ds.bands) || ds.bands == 0) {
        throw ParseError(1, "invalid bands value");
    }
    if (!parse_number(header_value(line, "classes", 1), ds.classes) || ds.classes == 0) {
        throw ParseError(1, "invalid classes value");
    }

    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::size_t fields = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view field(line.data() + start,
                                         (comma == std::string::npos ? line.size() : comma) - start);
            if (fields == 0) {
                std::size_t label = 0;
                if (!parse_number(field, label)) throw ParseError(line_no, "invalid label '" + std::string(field) + "'");
                if (label >= ds.classes) {
                    throw ParseError(line_no, "label " + std::to_string(label) + " out of range for " +
                                                  std::to_string(ds.classes) + " classes");
                }
                ds.labels.push_back(label);
            } else {
                double v = 0.0;
                if (!parse_number(field, v) || !std::isfinite(v)) {
                    throw ParseError(line_no, "band " + std::to_string(fields - 1) + " is not a finite number");
                }
                values.push_back(v);
            }
            ++fields;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields != ds.bands + 1) {
            throw ParseError(line_no, "expected " + std::to_string(ds.bands + 1) + " fields, got " +
                                          std::to_string(fields));
        }
    }
    if (ds.labels.empty()) throw DataError("dataset '" + ds.name + "' contains no samples");
    ds.spectra = Matrix(ds.labels.size(), ds.bands, std::move(values));
    ds.validate(false);
    return ds;
}

void save_csv(const SceneDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_csv(ds, out);
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

SceneDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_csv(in);
}

}  // namespace adgkt
