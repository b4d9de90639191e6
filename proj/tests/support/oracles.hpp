// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tassel/components.hpp"
#include "tassel/metrics.hpp"
#include "tassel/model.hpp"
#include "tassel/ops.hpp"

namespace oracle {

using tassel::Rng;
using tassel::Shape;
using tassel::Tensor;
using tassel::Var;
using VarD = Var<double>;

struct GradCheck {
    double worst = 0.0;
    int cases = 0;
    int checked = 0;
    std::string where;

    void merge(const GradCheck& o) {
        if (o.worst > worst) {
            worst = o.worst;
            where = o.where;
        }
        cases += o.cases;
        checked += o.checked;
    }
};

inline Tensor<double> random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

// Values bounded away from zero so ReLU kinks stay outside the FD stencil.
inline Tensor<double> kink_free_tensor(Rng& rng, Shape shape) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.data()) {
        const double m = rng.uniform(0.05, 1.0);
        v = rng.uniform() < 0.5 ? -m : m;
    }
    return t;
}

// sum(out * w) for a fixed random w, so every output element matters.
inline VarD weighted_sum(const VarD& out, const Tensor<double>& w) {
    auto flat = tassel::ops::reshape(out, Shape{1, out.value().numel()});
    auto col = tassel::constant(w.reshaped({w.numel(), 1}));
    return tassel::ops::matmul(flat, col);
}

/// Central-difference check of d loss / d input for every element of every
/// input. `build` must rebuild the loss from scratch on each call.
inline GradCheck check_gradients(const std::string& name, std::vector<VarD> inputs,
                                 const std::function<VarD(const std::vector<VarD>&)>& build, double step = 1e-3) {
    for (auto& v : inputs) v.zero_grad();
    auto loss = build(inputs);
    tassel::backward(loss);
    GradCheck r;
    r.cases = 1;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto& v = inputs[i];
        if (!v.requires_grad()) continue;
        const Tensor<double> analytic = v.grad();
        for (std::int64_t j = 0; j < v.value().numel(); ++j) {
            auto data = v.mutable_value().data();
            const double old = data[static_cast<std::size_t>(j)];
            data[static_cast<std::size_t>(j)] = old + step;
            const double up = build(inputs).value().item();
            data[static_cast<std::size_t>(j)] = old - step;
            const double down = build(inputs).value().item();
            data[static_cast<std::size_t>(j)] = old;
            const double numeric = (up - down) / (2.0 * step);
            const double err = std::abs(analytic.data()[static_cast<std::size_t>(j)] - numeric) / std::max(1.0, std::abs(numeric));
            ++r.checked;
            if (err > r.worst) {
                r.worst = err;
                r.where = name + " input " + std::to_string(i) + "[" + std::to_string(j) + "]";
            }
        }
    }
    return r;
}

/// Random finite-difference cases over every differentiable primitive.
inline GradCheck primitive_gradient_suite(int cases_per_op, std::uint64_t seed) {
    namespace ops = tassel::ops;
    using tassel::parameter;
    GradCheck total;
    Rng rng(seed);
    auto dim = [&](int lo, int hi) { return static_cast<std::int64_t>(lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)))); };

    for (int c = 0; c < cases_per_op; ++c) {
        const auto m = dim(1, 4), k = dim(1, 4), n = dim(1, 4);
        {
            auto w = random_tensor(rng, {m, n});
            total.merge(check_gradients("matmul", {parameter(random_tensor(rng, {m, k})), parameter(random_tensor(rng, {k, n}))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::matmul(in[0], in[1]), w); }));
        }
        {
            auto w = random_tensor(rng, {m, n});
            total.merge(check_gradients(
                "dense", {parameter(random_tensor(rng, {m, k})), parameter(random_tensor(rng, {k, n})), parameter(random_tensor(rng, {n}))},
                [&](const std::vector<VarD>& in) { return weighted_sum(ops::dense(in[0], in[1], in[2]), w); }));
        }
        {
            auto w = random_tensor(rng, {m, n});
            total.merge(check_gradients("add", {parameter(random_tensor(rng, {m, n})), parameter(random_tensor(rng, {m, n}))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::add(in[0], in[1]), w); }));
        }
        {
            auto w = random_tensor(rng, {m, n});
            const double s = rng.uniform(-2.0, 2.0);
            total.merge(check_gradients("scale", {parameter(random_tensor(rng, {m, n}))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::scale(in[0], s), w); }));
        }
        total.merge(check_gradients("sum", {parameter(random_tensor(rng, {m, n}))},
                                    [&](const std::vector<VarD>& in) { return ops::sum(in[0]); }));
        total.merge(check_gradients("mean", {parameter(random_tensor(rng, {m, n}))},
                                    [&](const std::vector<VarD>& in) { return ops::mean(in[0]); }));
        {
            auto w = random_tensor(rng, {m, n});
            total.merge(check_gradients("relu", {parameter(kink_free_tensor(rng, {m, n}))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::relu(in[0]), w); }));
        }
        {
            auto w = random_tensor(rng, {m, n});
            total.merge(check_gradients("tanh", {parameter(random_tensor(rng, {m, n}, -2.0, 2.0))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::tanh(in[0]), w); }));
        }
        {
            auto w = random_tensor(rng, {m * n});
            total.merge(check_gradients("reshape", {parameter(random_tensor(rng, {m, n}))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::reshape(in[0], {m * n}), w); }));
        }
        {
            auto w = random_tensor(rng, {m, n});
            total.merge(check_gradients("softmax_rows", {parameter(random_tensor(rng, {m, n}, -2.0, 2.0))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::softmax_rows(in[0]), w); }));
        }
        {
            const auto N = dim(1, 3), T = dim(3, 9), cin = dim(1, 3), cout = dim(1, 3), kk = dim(1, 3), stride = dim(1, 2);
            const auto padding = rng.uniform() < 0.7 ? tassel::Padding::same : tassel::Padding::valid;
            const auto tout = tassel::conv_output_length(T, kk, stride, padding);
            auto w = random_tensor(rng, {N, tout, cout});
            total.merge(check_gradients(
                "conv1d",
                {parameter(random_tensor(rng, {N, T, cin})), parameter(random_tensor(rng, {kk, cin, cout})),
                 parameter(random_tensor(rng, {cout}))},
                [&](const std::vector<VarD>& in) { return weighted_sum(ops::conv1d(in[0], in[1], in[2], stride, padding), w); }));
        }
        {
            // Well-spread batches: the normalized output is flat in the
            // direction of any near-duplicate pair, which makes the step-1e-3
            // difference quotient itself inaccurate.
            const auto N = dim(4, 8), F = dim(1, 4);
            auto w = random_tensor(rng, {N, F});
            auto base = tassel::BatchNorm<double>::create(F);
            total.merge(check_gradients(
                "batchnorm", {parameter(random_tensor(rng, {N, F}, -4.0, 4.0)), base.gamma, base.beta},
                [&](const std::vector<VarD>& in) {
                    auto state = base;
                    state.gamma = in[1];
                    state.beta = in[2];
                    return weighted_sum(ops::batchnorm(in[0], state, tassel::Mode::train), w);
                }));
        }
        {
            auto w = random_tensor(rng, {m, n});
            const auto mask_seed = rng.next();
            total.merge(check_gradients("dropout", {parameter(random_tensor(rng, {m, n}))}, [&](const std::vector<VarD>& in) {
                Rng mask(mask_seed);
                return weighted_sum(ops::dropout(in[0], 0.4, tassel::Mode::train, mask), w);
            }));
        }
        {
            const auto T = dim(1, 5);
            auto w = random_tensor(rng, {m, n});
            total.merge(check_gradients("global_avg_pool", {parameter(random_tensor(rng, {m, T, n}))},
                                        [&](const std::vector<VarD>& in) { return weighted_sum(ops::global_avg_pool(in[0]), w); }));
        }
        {
            const auto T = dim(1, 4), n2 = dim(1, 3);
            auto w = random_tensor(rng, {m, T, n + n2});
            total.merge(check_gradients(
                "concat_channels", {parameter(random_tensor(rng, {m, T, n})), parameter(random_tensor(rng, {m, T, n2}))},
                [&](const std::vector<VarD>& in) { return weighted_sum(ops::concat_channels(in[0], in[1]), w); }));
        }
        {
            const auto C = dim(2, 5);
            std::vector<int> labels;
            for (std::int64_t i = 0; i < m; ++i) labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(C))));
            total.merge(check_gradients("cross_entropy", {parameter(random_tensor(rng, {m, C}, -3.0, 3.0))},
                                        [&](const std::vector<VarD>& in) { return ops::cross_entropy(in[0], labels); }));
        }
        {
            const auto B = dim(1, 3), L = dim(1, 4), d = dim(1, 4);
            auto w = random_tensor(rng, {B, d});
            total.merge(check_gradients(
                "attention_pool", {parameter(random_tensor(rng, {B, L})), parameter(random_tensor(rng, {B * L, d}))},
                [&](const std::vector<VarD>& in) { return weighted_sum(ops::attention_pool(in[0], in[1]), w); }));
        }
    }
    return total;
}

/// Reduced-width network: every filter and unit count divided by 8.
inline tassel::ModelConfig reduced_config(std::int64_t T, std::int64_t B, int classes, int slots) {
    tassel::ModelConfig c;
    c.length = T;
    c.bands = B;
    c.classes = classes;
    c.slots = slots;
    c.conv_filters = 32;
    c.wide_filters = 64;
    c.head_units = 64;
    return c;
}

inline tassel::ComponentSet random_components(Rng& rng, const std::string& id, std::int64_t T, std::int64_t B, int slots) {
    tassel::ComponentSet s;
    s.object_id = id;
    s.length = T;
    s.bands = B;
    s.slots = slots;
    s.effective_k = slots;
    for (std::int64_t i = 0; i < slots * T * B; ++i) s.centroids.push_back(static_cast<float>(rng.uniform()));
    for (int l = 0; l < slots; ++l) s.assignment.push_back(l);
    return s;
}

/// Finite-difference check of the full training loss with respect to a
/// sample of every parameter tensor of a 64-bit network.
inline GradCheck end_to_end_gradient_check(std::uint64_t seed, int samples_per_tensor, double lambda = 0.5,
                                           double step = 1e-5) {
    Rng rng(seed);
    const auto cfg = reduced_config(8, 3, 3, 2);
    tassel::TasselNet<double> net(cfg, seed);
    std::vector<tassel::ComponentSet> sets{random_components(rng, "a", 8, 3, 2), random_components(rng, "b", 8, 3, 2)};
    std::vector<const tassel::ComponentSet*> batch{&sets[0], &sets[1]};
    std::vector<int> labels{0, 2};
    const auto dropout_seed = rng.next();

    auto eval = [&]() {
        std::vector<Tensor<double>> saved;
        for (const auto& b : net.buffers()) saved.push_back(*b.tensor);
        Rng drop(dropout_seed);
        auto loss = net.loss(batch, labels, lambda, drop);
        std::size_t i = 0;
        for (auto& b : net.buffers()) *b.tensor = saved[i++];
        return loss.total;
    };

    auto params = net.parameters();
    for (auto& p : params) p.var.zero_grad();
    tassel::backward(eval());
    GradCheck r;
    r.cases = 1;
    for (auto& p : params) {
        VarD v = p.var;
        const Tensor<double> analytic = v.grad();
        const auto n = v.value().numel();
        for (int s = 0; s < samples_per_tensor && s < n; ++s) {
            const auto j = static_cast<std::size_t>(n <= samples_per_tensor ? s : static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n))));
            auto data = v.mutable_value().data();
            const double old = data[j];
            data[j] = old + step;
            const double up = eval().value().item();
            data[j] = old - step;
            const double down = eval().value().item();
            data[j] = old;
            const double numeric = (up - down) / (2.0 * step);
            const double err = std::abs(analytic.data()[j] - numeric) / std::max(1.0, std::abs(numeric));
            ++r.checked;
            if (err > r.worst) {
                r.worst = err;
                r.where = p.name + "[" + std::to_string(j) + "]";
            }
        }
    }
    return r;
}

/// Global minimum of the within-cluster sum of squares over every
/// assignment of n points to at most k clusters.
inline double exhaustive_min_inertia(const std::vector<double>& points, std::size_t n, std::size_t dim, int k) {
    std::vector<int> assign(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t p = 0; p < n; ++p) {
            ++counts[static_cast<std::size_t>(assign[p])];
            for (std::size_t d = 0; d < dim; ++d) sums[static_cast<std::size_t>(assign[p]) * dim + d] += points[p * dim + d];
        }
        double inertia = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const auto c = static_cast<std::size_t>(assign[p]);
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = points[p * dim + d] - sums[c * dim + d] / counts[c];
                inertia += diff * diff;
            }
        }
        best = std::min(best, inertia);
        std::size_t i = 0;
        while (i < n && ++assign[i] == k) assign[i++] = 0;
        if (i == n) break;
    }
    return best;
}

struct BruteMetrics {
    double accuracy = 0.0, kappa = 0.0, weighted_f1 = 0.0, macro_f1 = 0.0;
    std::vector<double> precision, recall, f1;
};

/// Per-class recount straight from the prediction and label vectors.
inline BruteMetrics brute_metrics(const std::vector<int>& pred, const std::vector<int>& truth, int classes) {
    BruteMetrics m;
    const double n = static_cast<double>(truth.size());
    double correct = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += pred[i] == truth[i];
    m.accuracy = correct / n;
    double pe = 0.0;
    for (int c = 0; c < classes; ++c) {
        double tp = 0, fp = 0, fn = 0, in_truth = 0, in_pred = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            tp += pred[i] == c && truth[i] == c;
            fp += pred[i] == c && truth[i] != c;
            fn += pred[i] != c && truth[i] == c;
            in_truth += truth[i] == c;
            in_pred += pred[i] == c;
        }
        const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        m.precision.push_back(p);
        m.recall.push_back(r);
        m.f1.push_back(f);
        m.weighted_f1 += f * in_truth / n;
        m.macro_f1 += f / classes;
        pe += (in_truth / n) * (in_pred / n);
    }
    m.kappa = pe < 1.0 ? (m.accuracy - pe) / (1.0 - pe) : (m.accuracy == 1.0 ? 1.0 : 0.0);
    return m;
}

}  // namespace oracle
