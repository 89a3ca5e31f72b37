#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "adgkt/matrix.hpp"

namespace adgkt {

/// Labeled per-pixel spectra of one scene.
struct SceneDataset {
    std::string name;
    std::size_t bands = 0;
    std::size_t classes = 0;
    Matrix spectra;                   // N x bands
    std::vector<std::size_t> labels;  // N entries in [0, classes)

    std::size_t size() const noexcept { return labels.size(); }

    /// Checks shapes, label range and finiteness. With `require_all_classes`,
    /// also that every class has at least one sample.
    void validate(bool require_all_classes = true) const;

    SceneDataset subset(std::span<const std::size_t> indices) const;
    std::vector<std::size_t> class_counts() const;
};

struct SynthConfig {
    std::size_t bands_source = 48;
    std::size_t bands_target = 32;
    std::size_t classes_source = 7;
    std::size_t classes_target = 5;
    std::size_t shared_classes = 3;
    std::size_t samples_per_class_source = 200;
    std::size_t samples_per_class_target = 60;
    std::size_t latent_dim = 8;
    double class_separation = 0.12;
    double noise_sigma = 0.1;
    double conflict_strength = 0.6;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ScenePair {
    SceneDataset source;
    SceneDataset target;
};

/// Each class gets a latent prototype; shared classes reuse theirs across
/// scenes. A scene maps (prototype + noise_sigma * N(0, I)) through its own
/// linear band map. The target map blends the source map (resampled to the
/// target band count) with a random orthonormal map by conflict_strength.
ScenePair generate_pair(const SynthConfig& cfg);

struct Split {
    SceneDataset train;
    SceneDataset eval;
};

/// Exactly k samples per class without replacement go to `train`, the rest
/// to `eval`. Deterministic per seed.
Split sample_k_per_class(const SceneDataset& ds, std::size_t k, std::uint64_t seed);

/// Format: `# scene=<name> bands=<B> classes=<C>`, then `label,b0,...,b{B-1}`
/// per sample with 17 significant digits; LF line endings.
void write_csv(const SceneDataset& ds, std::ostream& out);
SceneDataset read_csv(std::istream& in);

void save_csv(const SceneDataset& ds, const std::filesystem::path& path);
SceneDataset load_csv(const std::filesystem::path& path);

}  // namespace adgkt
