#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tassel/dataset.hpp"

namespace tassel {

/// Synthetic object-based SITS. Every object mixes pixels of its class
/// prototype with a region of pixels drawn from a class-independent pool of
/// distractor shapes, so the object label is weak: only part of each object
/// carries it.
struct SynthConfig {
    std::int64_t length = 24;  // T
    std::int64_t bands = 4;    // B
    int classes = 4;
    int objects_per_class = 60;
    int min_pixels = 16;
    int max_pixels = 36;
    double distractor_fraction = 0.5;
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;
    bool coords = true;

    void validate() const;
    /// C half-phase seasonal shapes, one flat and one step shape.
    int distractor_pool_size() const { return classes + 2; }
};

nlohmann::json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});

/// Which pixels of each object came from the class prototype.
struct SynthObjectTruth {
    std::string id;
    int label = 0;
    int distractor_shape = -1;  // pool index, -1 when the object has no distractor pixels
    std::vector<bool> discriminative;  // one flag per pixel
};

struct SynthTruth {
    std::vector<SynthObjectTruth> objects;
};

nlohmann::json to_json(const SynthTruth& truth);
SynthTruth synth_truth_from_json(const nlohmann::json& j);

struct SynthData {
    Dataset dataset;
    SynthTruth truth;
};

SynthData generate(const SynthConfig& config);

/// Noise-free T x B class prototype.
std::vector<double> class_prototype(const SynthConfig& config, int c);
/// Noise-free T x B distractor shape at unit amplitude jitter.
std::vector<double> distractor_prototype(const SynthConfig& config, int j);

/// Writes `<path>` (NDJSON) and the `<stem>.truth.json` sidecar next to it.
void save_synth(const std::filesystem::path& path, const SynthData& data);
std::filesystem::path truth_path(const std::filesystem::path& dataset);

}  // namespace tassel
