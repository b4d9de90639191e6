#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tassel/components.hpp"
#include "tassel/model.hpp"

namespace tassel {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename Real>
struct OptimizerState {
    AdamConfig config;
    std::int64_t step = 0;
    std::vector<Tensor<Real>> first_moment;
    std::vector<Tensor<Real>> second_moment;
};

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient. Moments are created lazily on the first step.
template <typename Real>
void adam_step(std::span<const ParamRef<Real>> params, OptimizerState<Real>& state);

/// Training hyperparameters. Field names double as CLI flag and JSON keys.
struct TrainConfig {
    int epochs = 5000;
    int batch_size = 32;
    double lr = 1e-4;
    double lambda = 0.5;
    int n_components = 6;
    std::uint64_t seed = 0;
    int eval_every = 10;   // validation cadence in epochs
    int report_every = 0;  // progress lines on stderr, 0 = silent
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double dropout = 0.5;
    int conv_filters = 256;
    int wide_filters = 512;
    int head_units = 512;
    int kmeans_restarts = 10;
    int kmeans_max_iters = 100;
    double kmeans_tol = 1e-6;

    void validate() const;
    KMeansOptions kmeans() const { return {kmeans_restarts, kmeans_max_iters, kmeans_tol}; }
    AdamConfig adam() const { return {lr, beta1, beta2, adam_eps}; }
};

nlohmann::json to_json(const TrainConfig& config);
/// Overlays the keys present in `j` onto `base`; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct FitReport {
    std::vector<double> train_loss;  // one per epoch
    std::vector<int> eval_epochs;    // 1-based epochs at which validation ran
    std::vector<double> val_weighted_f1;
    int selected_epoch = 0;
    double best_val_f1 = 0.0;
    double wall_seconds = 0.0;
};

/// Deterministic fields only; wall time is left out so equal runs serialize
/// to equal bytes.
nlohmann::json to_json(const FitReport& report);
std::string fit_trace_csv(const FitReport& report);

/// Index of the best validation score, earliest on ties.
std::size_t select_best(std::span<const double> scores);

/// Mini-batch training with Adam and validation-based model selection.
/// On return `model` holds the parameters of the selected epoch.
template <typename Model>
FitReport fit(Model& model, std::span<const ComponentSet> train, std::span<const int> train_labels,
              std::span<const ComponentSet> val, std::span<const int> val_labels, int classes,
              const TrainConfig& config);

}  // namespace tassel
