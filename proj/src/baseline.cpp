#include "tassel/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace tassel {

void MlpConfig::validate() const {
    if (length < 1 || bands < 1) throw ConfigError("baseline needs T >= 1 and B >= 1");
    if (classes < 1) throw ConfigError("classes must be >= 1");
    if (hidden_units < 1) throw ConfigError("hidden units must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
}

template <typename Real>
BaselineMlp<Real>::BaselineMlp(const MlpConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(derive_seed(seed, "init"));
    auto dense = [&](std::int64_t in, std::int64_t out) {
        Tensor<Real> w({in, out});
        const double limit = std::sqrt(6.0 / static_cast<double>(in));
        for (auto& v : w.data()) v = static_cast<Real>(rng.uniform(-limit, limit));
        return DenseLayer<Real>{parameter(std::move(w)), parameter(Tensor<Real>::zeros({out}))};
    };
    const std::int64_t h = config_.hidden_units;
    fc1_ = dense(config_.input_dim(), h);
    bn1_ = BatchNorm<Real>::create(h, config_.bn_eps, config_.bn_momentum);
    fc2_ = dense(h, h);
    bn2_ = BatchNorm<Real>::create(h, config_.bn_eps, config_.bn_momentum);
    out_ = dense(h, config_.classes);
}

template <typename Real>
Tensor<Real> BaselineMlp<Real>::inputs(std::span<const ComponentSet* const> batch) const {
    for (const auto* cs : batch)
        if (cs->slots != 1)
            throw ConfigError("the mean-representation baseline takes single-component sets, object '" +
                              cs->object_id + "' has " + std::to_string(cs->slots));
    return stack_components<Real>(batch, config_.length, config_.bands, 1)
        .reshaped({static_cast<std::int64_t>(batch.size()), config_.input_dim()});
}

template <typename Real>
Var<Real> BaselineMlp<Real>::forward(std::span<const ComponentSet* const> batch, Mode mode, Rng& rng) {
    auto x = constant(inputs(batch));
    auto z = ops::relu(ops::dense(x, fc1_.weight, fc1_.bias));
    z = ops::dropout(ops::batchnorm(z, bn1_, mode), config_.dropout, mode, rng);
    z = ops::relu(ops::dense(z, fc2_.weight, fc2_.bias));
    z = ops::dropout(ops::batchnorm(z, bn2_, mode), config_.dropout, mode, rng);
    return ops::dense(z, out_.weight, out_.bias);
}

template <typename Real>
Var<Real> BaselineMlp<Real>::forward(std::span<const ComponentSet* const> batch) const {
    auto x = constant(inputs(batch));
    auto z = ops::batchnorm(ops::relu(ops::dense(x, fc1_.weight, fc1_.bias)), bn1_);
    z = ops::batchnorm(ops::relu(ops::dense(z, fc2_.weight, fc2_.bias)), bn2_);
    return ops::dense(z, out_.weight, out_.bias);
}

template <typename Real>
typename BaselineMlp<Real>::Loss BaselineMlp<Real>::loss(std::span<const ComponentSet* const> batch,
                                                         std::span<const int> labels, double, Rng& rng) {
    if (labels.size() != batch.size()) throw ContractError("one label per object is required");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0) throw ContractError("object '" + batch[i]->object_id + "' is unlabeled");
    Loss out;
    out.total = ops::cross_entropy(forward(batch, Mode::train, rng), labels);
    out.main = out.total.value().item();
    return out;
}

template <typename Real>
std::vector<int> BaselineMlp<Real>::predict_labels(std::span<const ComponentSet> sets) const {
    std::vector<int> labels;
    constexpr std::size_t batch_size = 64;
    for (std::size_t start = 0; start < sets.size(); start += batch_size) {
        const std::size_t end = std::min(sets.size(), start + batch_size);
        std::vector<const ComponentSet*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&sets[i]);
        const auto logits = forward(batch).value();
        for (std::int64_t r = 0; r < logits.dim(0); ++r) {
            int best = 0;
            for (std::int64_t c = 1; c < logits.dim(1); ++c)
                if (logits.at(r, c) > logits.at(r, best)) best = static_cast<int>(c);
            labels.push_back(best);
        }
    }
    return labels;
}

template <typename Real>
std::vector<ParamRef<Real>> BaselineMlp<Real>::parameters() const {
    return {{"fc1.weight", fc1_.weight}, {"fc1.bias", fc1_.bias}, {"bn1.gamma", bn1_.gamma},
            {"bn1.beta", bn1_.beta},     {"fc2.weight", fc2_.weight}, {"fc2.bias", fc2_.bias},
            {"bn2.gamma", bn2_.gamma},   {"bn2.beta", bn2_.beta},     {"out.weight", out_.weight},
            {"out.bias", out_.bias}};
}

template <typename Real>
std::vector<BufferRef<Real>> BaselineMlp<Real>::buffers() {
    return {{"bn1.running_mean", &bn1_.running_mean},
            {"bn1.running_var", &bn1_.running_var},
            {"bn2.running_mean", &bn2_.running_mean},
            {"bn2.running_var", &bn2_.running_var}};
}

template class BaselineMlp<float>;
template class BaselineMlp<double>;

}  // namespace tassel
