#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tassel/baseline.hpp"
#include "tassel/checkpoint.hpp"
#include "tassel/metrics.hpp"
#include "tassel/training.hpp"

namespace tassel {

/// A dataset split, normalized with training statistics, with component
/// sets extracted for every part.
struct PreparedSplit {
    SplitIndices indices;
    DatasetSplit data;  // normalized
    NormStats norm;
    ClusteringSpec clustering;
    std::vector<ComponentSet> train, validation, test;
    std::vector<int> train_labels, validation_labels, test_labels;

    int classes() const { return static_cast<int>(data.train.class_count()); }
};

/// Splits with `seed`, fits the normalizer on the training part, then
/// clusters every object into `slots` components.
PreparedSplit prepare_split(const Dataset& raw, int slots, std::uint64_t seed, const KMeansOptions& options = {});

/// Re-extracts the components of an already normalized split.
void recluster(PreparedSplit& split, int slots, const KMeansOptions& options = {});

/// Normalizes raw data with the model's statistics and extracts components
/// exactly as during training.
std::vector<ComponentSet> components_for(const TrainedModel& model, const Dataset& raw);

ModelConfig model_config(const TrainConfig& config, const Dataset& data);

TrainedModel train_tassel(const PreparedSplit& split, const TrainConfig& config, FitReport* report = nullptr);

struct Evaluation {
    ConfusionMatrix confusion{1};
    MetricReport report;
    std::vector<PredictionRecord> predictions;
};

Evaluation evaluate(const TasselNet<float>& net, std::span<const ComponentSet> sets, std::span<const int> labels,
                    int classes);

/// Trains the mean-representation MLP on the same split (one component per
/// object) and scores it on the test part.
Evaluation run_baseline(const PreparedSplit& split, const TrainConfig& config, FitReport* report = nullptr);

}  // namespace tassel
