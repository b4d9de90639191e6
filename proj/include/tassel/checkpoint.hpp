#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tassel/components.hpp"
#include "tassel/dataset.hpp"
#include "tassel/model.hpp"

namespace tassel {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// How component sets must be extracted for a model.
struct ClusteringSpec {
    int slots = 6;
    std::uint64_t seed = 0;
    KMeansOptions options;
};

/// Everything needed to predict on raw data: architecture, class names,
/// normalization, clustering settings and weights.
struct TrainedModel {
    ModelConfig config;
    std::vector<std::string> class_names;
    NormStats norm;
    ClusteringSpec clustering;
    TasselNet<float> net;
};

/// Layout: "TASSELCK", u32 version, u64 manifest length, JSON manifest, then
/// little-endian float32 tensors in manifest order (parameters, then
/// batchnorm running statistics).
std::string serialize_checkpoint(const TrainedModel& model);
TrainedModel deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace tassel
