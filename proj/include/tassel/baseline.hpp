#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tassel/model.hpp"

namespace tassel {

struct MlpConfig {
    std::int64_t length = 0;  // T
    std::int64_t bands = 0;   // B
    int classes = 0;
    int hidden_units = 512;
    double dropout = 0.5;
    double bn_eps = 1e-5;
    double bn_momentum = 0.9;

    std::int64_t input_dim() const { return length * bands; }
    void validate() const;
};

/// Mean-representation baseline: the object's average pixel series,
/// flattened to T*B values, through two 512-unit dense layers, each followed
/// by ReLU, batch normalization and dropout.
///
/// Inputs are single-component sets (k-means with L = 1 yields the per-feature
/// mean), so it trains through the same loop as TasselNet.
template <typename Real>
class BaselineMlp {
public:
    BaselineMlp(const MlpConfig& config, std::uint64_t seed);
    BaselineMlp(const BaselineMlp&) = delete;
    BaselineMlp& operator=(const BaselineMlp&) = delete;
    BaselineMlp(BaselineMlp&&) noexcept = default;
    BaselineMlp& operator=(BaselineMlp&&) noexcept = default;

    const MlpConfig& config() const { return config_; }

    Var<Real> forward(std::span<const ComponentSet* const> batch, Mode mode, Rng& rng);
    Var<Real> forward(std::span<const ComponentSet* const> batch) const;

    struct Loss {
        Var<Real> total;
        double main = 0.0;
        double aux = 0.0;
    };

    /// Mean cross-entropy; `lambda` is accepted for interface parity and ignored.
    Loss loss(std::span<const ComponentSet* const> batch, std::span<const int> labels, double lambda, Rng& rng);

    std::vector<int> predict_labels(std::span<const ComponentSet> sets) const;

    std::vector<ParamRef<Real>> parameters() const;
    std::vector<BufferRef<Real>> buffers();

private:
    Tensor<Real> inputs(std::span<const ComponentSet* const> batch) const;

    MlpConfig config_;
    DenseLayer<Real> fc1_, fc2_, out_;
    BatchNorm<Real> bn1_, bn2_;
};

extern template class BaselineMlp<float>;
extern template class BaselineMlp<double>;

}  // namespace tassel
