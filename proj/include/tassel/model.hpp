#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tassel/components.hpp"
#include "tassel/ops.hpp"

namespace tassel {

/// Architecture hyperparameters. The defaults are the reference network:
/// four 256-filter k=3 blocks, a stride-2 and a stride-1 512-filter k=3
/// block, two parallel 512-filter k=1 blocks concatenated (d = 1024), and a
/// 512-512 classification head.
struct ModelConfig {
    std::int64_t length = 0;  // T
    std::int64_t bands = 0;   // B
    int classes = 0;
    int slots = 6;  // L, components per object
    int conv_filters = 256;
    int wide_filters = 512;
    int head_units = 512;
    double dropout = 0.5;
    double bn_eps = 1e-5;
    double bn_momentum = 0.9;

    std::int64_t embedding_dim() const { return 2 * static_cast<std::int64_t>(wide_filters); }
    void validate() const;
};

/// Output of the model for one object.
struct PredictionRecord {
    std::string object_id;
    int label = -1;
    std::vector<double> scores;           // softmax over classes
    std::vector<double> alpha;            // one weight per component slot
    std::vector<double> component_alpha;  // padded slots merged onto their source component
};

/// Sums the attention of padded duplicate slots onto the component they repeat.
std::vector<double> merge_alpha(std::span<const double> alpha, const ComponentSet& components);

template <typename Real>
struct ParamRef {
    std::string name;
    Var<Real> var;
};

template <typename Real>
struct BufferRef {
    std::string name;
    Tensor<Real>* tensor;
};

template <typename Real>
struct ConstBufferRef {
    std::string name;
    const Tensor<Real>* tensor;
};

template <typename Real>
struct ConvBlock {
    Var<Real> kernels;  // k x Cin x Cout
    Var<Real> bias;
    BatchNorm<Real> bn;
    std::int64_t stride = 1;
};

template <typename Real>
struct DenseLayer {
    Var<Real> weight;  // in x out
    Var<Real> bias;
};

/// Stacks component centroids into an [(objects * L) x T x B] tensor.
template <typename Real>
Tensor<Real> stack_components(std::span<const ComponentSet* const> batch, std::int64_t length, std::int64_t bands,
                              int slots);

/// Component-based classifier: one shared temporal CNN encodes every
/// component, attention pools the L encodings into one vector, and a dense
/// head classifies it. An auxiliary linear head on the pooled vector adds a
/// second loss term during training.
template <typename Real>
class TasselNet {
public:
    TasselNet(const ModelConfig& config, std::uint64_t seed);

    // Parameters are shared graph nodes, so a member-wise copy would alias
    // them. Use clone() for an independent copy.
    TasselNet(const TasselNet&) = delete;
    TasselNet& operator=(const TasselNet&) = delete;
    TasselNet(TasselNet&&) noexcept = default;
    TasselNet& operator=(TasselNet&&) noexcept = default;

    TasselNet clone() const { return cast<Real>(); }

    const ModelConfig& config() const { return config_; }

    struct Attention {
        Var<Real> pooled;  // [objects x d]
        Var<Real> alpha;   // [objects x L]
    };

    struct Output {
        Var<Real> logits;
        Var<Real> aux_logits;  // empty in inference mode
        Var<Real> alpha;
        Var<Real> pooled;
    };

    struct Loss {
        Var<Real> total;
        double main = 0.0;
        double aux = 0.0;
    };

    /// [N x T x B] series -> [N x d] encodings.
    Var<Real> encode(const Var<Real>& series, Mode mode, Rng& rng);
    Var<Real> encode(const Var<Real>& series) const;

    /// Attention pooling over groups of `slots` consecutive rows of `h`.
    Attention attend(const Var<Real>& h, std::int64_t slots) const;

    Var<Real> classify(const Var<Real>& pooled, Mode mode);
    Var<Real> classify(const Var<Real>& pooled) const;

    /// Training-only head; calling it in inference mode is a contract error.
    Var<Real> classify_aux(const Var<Real>& pooled, Mode mode) const;

    Output forward(std::span<const ComponentSet* const> batch, Mode mode, Rng& rng);
    Output forward(std::span<const ComponentSet* const> batch) const;

    /// Mean main cross-entropy plus lambda times the mean auxiliary
    /// cross-entropy. A negative label marks an unlabeled object and is
    /// rejected. With lambda == 0 the auxiliary head is not evaluated.
    Loss loss(std::span<const ComponentSet* const> batch, std::span<const int> labels, double lambda, Rng& rng);

    std::vector<PredictionRecord> predict(std::span<const ComponentSet> sets, std::size_t batch_size = 64) const;
    std::vector<int> predict_labels(std::span<const ComponentSet> sets) const;

    std::vector<ParamRef<Real>> parameters() const;
    std::vector<BufferRef<Real>> buffers();
    std::vector<ConstBufferRef<Real>> buffers() const;
    std::int64_t parameter_count() const;

    template <typename Other>
    TasselNet<Other> cast() const;

private:
    template <typename Self>
    static Var<Real> encode_impl(Self& self, const Var<Real>& series, Mode mode, Rng* rng);
    template <typename Self>
    static Var<Real> classify_impl(Self& self, const Var<Real>& pooled, Mode mode);
    template <typename Self>
    static Output forward_impl(Self& self, std::span<const ComponentSet* const> batch, Mode mode, Rng* rng);

    ModelConfig config_;
    std::vector<ConvBlock<Real>> blocks_;  // B1..B8
    DenseLayer<Real> attn_proj_;           // W_a, b_a
    Var<Real> attn_score_;                 // v_a, [d x 1]
    DenseLayer<Real> fc1_, fc2_, out_;
    BatchNorm<Real> bn1_, bn2_;
    DenseLayer<Real> aux_;
};

template <typename Real>
template <typename Other>
TasselNet<Other> TasselNet<Real>::cast() const {
    TasselNet<Other> out(config_, 0);
    auto src = parameters();
    auto dst = out.parameters();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i].var.mutable_value() = src[i].var.value().template cast<Other>();
    auto sb = buffers();
    auto db = out.buffers();
    for (std::size_t i = 0; i < sb.size(); ++i) *db[i].tensor = sb[i].tensor->template cast<Other>();
    return out;
}

extern template class TasselNet<float>;
extern template class TasselNet<double>;

}  // namespace tassel
