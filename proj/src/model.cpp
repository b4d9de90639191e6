#include "tassel/model.hpp"

#include <algorithm>
#include <cmath>

namespace tassel {

void ModelConfig::validate() const {
    if (length < 4) throw ShapeError("the encoder needs T >= 4, got T=" + std::to_string(length));
    if (bands < 1) throw ConfigError("bands must be >= 1");
    if (classes < 1) throw ConfigError("classes must be >= 1");
    if (slots < 1) throw ConfigError("components per object must be >= 1");
    if (conv_filters < 1 || wide_filters < 1 || head_units < 1) throw ConfigError("layer widths must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
    if (bn_eps <= 0.0) throw ConfigError("batchnorm eps must be positive");
    if (bn_momentum < 0.0 || bn_momentum >= 1.0) throw ConfigError("batchnorm momentum must lie in [0, 1)");
}

std::vector<double> merge_alpha(std::span<const double> alpha, const ComponentSet& components) {
    if (static_cast<int>(alpha.size()) != components.slots)
        throw ContractError("alpha has " + std::to_string(alpha.size()) + " entries for " +
                            std::to_string(components.slots) + " component slots");
    std::vector<double> merged(static_cast<std::size_t>(components.effective_k), 0.0);
    for (int l = 0; l < components.slots; ++l) merged[static_cast<std::size_t>(components.source_of(l))] += alpha[l];
    return merged;
}

template <typename Real>
Tensor<Real> stack_components(std::span<const ComponentSet* const> batch, std::int64_t length, std::int64_t bands,
                              int slots) {
    if (batch.empty()) throw ContractError("empty batch");
    const std::int64_t per = length * bands;
    Tensor<Real> out({static_cast<std::int64_t>(batch.size()) * slots, length, bands});
    Real* dst = out.ptr();
    for (const ComponentSet* cs : batch) {
        if (cs->slots != slots)
            throw ConfigError("object '" + cs->object_id + "' carries " + std::to_string(cs->slots) +
                              " components but the model expects L=" + std::to_string(slots));
        if (cs->length != length || cs->bands != bands)
            throw ShapeError("object '" + cs->object_id + "' components are " + std::to_string(cs->length) + "x" +
                             std::to_string(cs->bands) + ", model expects " + std::to_string(length) + "x" +
                             std::to_string(bands));
        dst = std::transform(cs->centroids.begin(), cs->centroids.begin() + slots * per, dst,
                             [](float v) { return static_cast<Real>(v); });
    }
    return out;
}

namespace {

template <typename Real>
Var<Real> he_uniform(Shape shape, std::int64_t fan_in, Rng& rng) {
    Tensor<Real> t(std::move(shape));
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : t.data()) v = static_cast<Real>(rng.uniform(-limit, limit));
    return parameter(std::move(t));
}

template <typename Real>
DenseLayer<Real> make_dense(std::int64_t in, std::int64_t out, Rng& rng) {
    return {he_uniform<Real>({in, out}, in, rng), parameter(Tensor<Real>::zeros({out}))};
}

}  // namespace

template <typename Real>
TasselNet<Real>::TasselNet(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(derive_seed(seed, "init"));
    const std::int64_t f1 = config_.conv_filters, f2 = config_.wide_filters;
    struct Spec {
        std::int64_t in, out, k, stride;
    };
    const Spec specs[] = {{config_.bands, f1, 3, 1}, {f1, f1, 3, 1}, {f1, f1, 3, 1}, {f1, f1, 3, 1},
                          {f1, f2, 3, 2},            {f2, f2, 3, 1}, {f2, f2, 1, 1}, {f2, f2, 1, 1}};
    for (const auto& s : specs) {
        ConvBlock<Real> blk;
        blk.kernels = he_uniform<Real>({s.k, s.in, s.out}, s.k * s.in, rng);
        blk.bias = parameter(Tensor<Real>::zeros({s.out}));
        blk.bn = BatchNorm<Real>::create(s.out, config_.bn_eps, config_.bn_momentum);
        blk.stride = s.stride;
        blocks_.push_back(std::move(blk));
    }
    const std::int64_t d = config_.embedding_dim(), h = config_.head_units, c = config_.classes;
    attn_proj_ = make_dense<Real>(d, d, rng);
    attn_score_ = he_uniform<Real>({d, 1}, d, rng);
    fc1_ = make_dense<Real>(d, h, rng);
    bn1_ = BatchNorm<Real>::create(h, config_.bn_eps, config_.bn_momentum);
    fc2_ = make_dense<Real>(h, h, rng);
    bn2_ = BatchNorm<Real>::create(h, config_.bn_eps, config_.bn_momentum);
    out_ = make_dense<Real>(h, c, rng);
    aux_ = make_dense<Real>(d, c, rng);
}

template <typename Real>
template <typename Self>
Var<Real> TasselNet<Real>::encode_impl(Self& self, const Var<Real>& series, Mode mode, Rng* rng) {
    constexpr bool frozen = std::is_const_v<Self>;
    const auto& cfg = self.config_;
    if (series.value().rank() != 3) throw ShapeError("encode expects [N x T x B] input");
    if (series.dim(1) < 4) throw ShapeError("the encoder needs T >= 4, got T=" + std::to_string(series.dim(1)));
    if (series.dim(2) != cfg.bands)
        throw ShapeError("encode expects B=" + std::to_string(cfg.bands) + " bands, got " + std::to_string(series.dim(2)));

    auto block = [&](auto& blk, const Var<Real>& x) {
        auto y = ops::relu(ops::conv1d(x, blk.kernels, blk.bias, blk.stride, Padding::same));
        if constexpr (frozen) {
            return ops::batchnorm(y, blk.bn);
        } else {
            y = ops::batchnorm(y, blk.bn, mode);
            return ops::dropout(y, cfg.dropout, mode, *rng);
        }
    };

    Var<Real> h = series;
    for (std::size_t i = 0; i < 6; ++i) h = block(self.blocks_[i], h);
    auto left = block(self.blocks_[6], h);
    auto right = block(self.blocks_[7], h);
    return ops::global_avg_pool(ops::concat_channels(left, right));
}

template <typename Real>
Var<Real> TasselNet<Real>::encode(const Var<Real>& series, Mode mode, Rng& rng) {
    return encode_impl(*this, series, mode, &rng);
}

template <typename Real>
Var<Real> TasselNet<Real>::encode(const Var<Real>& series) const {
    return encode_impl(*this, series, Mode::infer, nullptr);
}

template <typename Real>
typename TasselNet<Real>::Attention TasselNet<Real>::attend(const Var<Real>& h, std::int64_t slots) const {
    if (slots < 1) throw ConfigError("attention needs L >= 1");
    if (h.value().rank() != 2 || h.dim(1) != config_.embedding_dim() || h.dim(0) % slots != 0)
        throw ShapeError("attend expects [(objects * L) x d] encodings, got " + shape_str(h.shape()));
    const std::int64_t objects = h.dim(0) / slots;
    auto energy = ops::tanh(ops::dense(h, attn_proj_.weight, attn_proj_.bias));
    auto scores = ops::reshape(ops::matmul(energy, attn_score_), {objects, slots});
    auto alpha = ops::softmax_rows(scores);
    return {ops::attention_pool(alpha, h), alpha};
}

template <typename Real>
template <typename Self>
Var<Real> TasselNet<Real>::classify_impl(Self& self, const Var<Real>& pooled, Mode mode) {
    auto norm = [&](auto& bn, const Var<Real>& x) {
        if constexpr (std::is_const_v<Self>)
            return ops::batchnorm(x, bn);
        else
            return ops::batchnorm(x, bn, mode);
    };
    auto z = norm(self.bn1_, ops::relu(ops::dense(pooled, self.fc1_.weight, self.fc1_.bias)));
    z = norm(self.bn2_, ops::relu(ops::dense(z, self.fc2_.weight, self.fc2_.bias)));
    return ops::dense(z, self.out_.weight, self.out_.bias);
}

template <typename Real>
Var<Real> TasselNet<Real>::classify(const Var<Real>& pooled, Mode mode) {
    return classify_impl(*this, pooled, mode);
}

template <typename Real>
Var<Real> TasselNet<Real>::classify(const Var<Real>& pooled) const {
    return classify_impl(*this, pooled, Mode::infer);
}

template <typename Real>
Var<Real> TasselNet<Real>::classify_aux(const Var<Real>& pooled, Mode mode) const {
    if (mode != Mode::train)
        throw ContractError("the auxiliary classifier is training-only; its output is discarded at inference");
    return ops::dense(pooled, aux_.weight, aux_.bias);
}

template <typename Real>
template <typename Self>
typename TasselNet<Real>::Output TasselNet<Real>::forward_impl(Self& self, std::span<const ComponentSet* const> batch,
                                                                Mode mode, Rng* rng) {
    const auto& cfg = self.config_;
    auto series = constant(stack_components<Real>(batch, cfg.length, cfg.bands, cfg.slots));
    Var<Real> h;
    if constexpr (std::is_const_v<Self>)
        h = self.encode(series);
    else
        h = self.encode(series, mode, *rng);
    auto att = self.attend(h, cfg.slots);
    Output out;
    out.pooled = att.pooled;
    out.alpha = att.alpha;
    if constexpr (std::is_const_v<Self>) {
        out.logits = self.classify(att.pooled);
    } else {
        out.logits = self.classify(att.pooled, mode);
        if (mode == Mode::train) out.aux_logits = self.classify_aux(att.pooled, mode);
    }
    return out;
}

template <typename Real>
typename TasselNet<Real>::Output TasselNet<Real>::forward(std::span<const ComponentSet* const> batch, Mode mode,
                                                          Rng& rng) {
    return forward_impl(*this, batch, mode, &rng);
}

template <typename Real>
typename TasselNet<Real>::Output TasselNet<Real>::forward(std::span<const ComponentSet* const> batch) const {
    return forward_impl(*this, batch, Mode::infer, nullptr);
}

template <typename Real>
typename TasselNet<Real>::Loss TasselNet<Real>::loss(std::span<const ComponentSet* const> batch,
                                                     std::span<const int> labels, double lambda, Rng& rng) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (labels.size() != batch.size()) throw ContractError("one label per object is required");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0) throw ContractError("object '" + batch[i]->object_id + "' is unlabeled");
    auto out = forward(batch, Mode::train, rng);
    Loss result;
    auto main = ops::cross_entropy(out.logits, labels);
    result.main = main.value().item();
    if (lambda == 0.0) {
        result.total = main;
        return result;
    }
    auto aux = ops::cross_entropy(out.aux_logits, labels);
    result.aux = aux.value().item();
    result.total = ops::add(main, ops::scale(aux, static_cast<Real>(lambda)));
    return result;
}

template <typename Real>
std::vector<PredictionRecord> TasselNet<Real>::predict(std::span<const ComponentSet> sets, std::size_t batch_size) const {
    std::vector<PredictionRecord> records;
    records.reserve(sets.size());
    if (batch_size == 0) batch_size = 1;
    for (std::size_t start = 0; start < sets.size(); start += batch_size) {
        const std::size_t end = std::min(sets.size(), start + batch_size);
        std::vector<const ComponentSet*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&sets[i]);
        auto out = forward(batch);
        const auto& logits = out.logits.value();
        const auto& alpha = out.alpha.value();
        const auto classes = logits.dim(1), slots = alpha.dim(1);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            PredictionRecord rec;
            rec.object_id = batch[b]->object_id;
            std::vector<double> row(static_cast<std::size_t>(classes));
            for (std::int64_t c = 0; c < classes; ++c) row[c] = logits.at(static_cast<std::int64_t>(b), c);
            rec.label = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
            rec.scores = softmax(row);
            rec.alpha.resize(static_cast<std::size_t>(slots));
            for (std::int64_t l = 0; l < slots; ++l) rec.alpha[l] = alpha.at(static_cast<std::int64_t>(b), l);
            rec.component_alpha = merge_alpha(rec.alpha, *batch[b]);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

template <typename Real>
std::vector<int> TasselNet<Real>::predict_labels(std::span<const ComponentSet> sets) const {
    std::vector<int> labels;
    for (const auto& rec : predict(sets)) labels.push_back(rec.label);
    return labels;
}

template <typename Real>
std::vector<ParamRef<Real>> TasselNet<Real>::parameters() const {
    std::vector<ParamRef<Real>> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const std::string p = "encoder.b" + std::to_string(i + 1) + ".";
        out.push_back({p + "conv.kernels", blocks_[i].kernels});
        out.push_back({p + "conv.bias", blocks_[i].bias});
        out.push_back({p + "bn.gamma", blocks_[i].bn.gamma});
        out.push_back({p + "bn.beta", blocks_[i].bn.beta});
    }
    out.push_back({"attention.proj.weight", attn_proj_.weight});
    out.push_back({"attention.proj.bias", attn_proj_.bias});
    out.push_back({"attention.score", attn_score_});
    out.push_back({"head.fc1.weight", fc1_.weight});
    out.push_back({"head.fc1.bias", fc1_.bias});
    out.push_back({"head.bn1.gamma", bn1_.gamma});
    out.push_back({"head.bn1.beta", bn1_.beta});
    out.push_back({"head.fc2.weight", fc2_.weight});
    out.push_back({"head.fc2.bias", fc2_.bias});
    out.push_back({"head.bn2.gamma", bn2_.gamma});
    out.push_back({"head.bn2.beta", bn2_.beta});
    out.push_back({"head.out.weight", out_.weight});
    out.push_back({"head.out.bias", out_.bias});
    out.push_back({"aux.weight", aux_.weight});
    out.push_back({"aux.bias", aux_.bias});
    return out;
}

template <typename Real>
std::vector<BufferRef<Real>> TasselNet<Real>::buffers() {
    std::vector<BufferRef<Real>> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const std::string p = "encoder.b" + std::to_string(i + 1) + ".bn.";
        out.push_back({p + "running_mean", &blocks_[i].bn.running_mean});
        out.push_back({p + "running_var", &blocks_[i].bn.running_var});
    }
    out.push_back({"head.bn1.running_mean", &bn1_.running_mean});
    out.push_back({"head.bn1.running_var", &bn1_.running_var});
    out.push_back({"head.bn2.running_mean", &bn2_.running_mean});
    out.push_back({"head.bn2.running_var", &bn2_.running_var});
    return out;
}

template <typename Real>
std::vector<ConstBufferRef<Real>> TasselNet<Real>::buffers() const {
    std::vector<ConstBufferRef<Real>> out;
    for (auto& b : const_cast<TasselNet*>(this)->buffers()) out.push_back({b.name, b.tensor});
    return out;
}

template <typename Real>
std::int64_t TasselNet<Real>::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& p : parameters()) n += p.var.value().numel();
    return n;
}

template Tensor<float> stack_components<float>(std::span<const ComponentSet* const>, std::int64_t, std::int64_t, int);
template Tensor<double> stack_components<double>(std::span<const ComponentSet* const>, std::int64_t, std::int64_t, int);
template class TasselNet<float>;
template class TasselNet<double>;

}  // namespace tassel
