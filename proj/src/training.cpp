#include "tassel/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>

#include "tassel/baseline.hpp"
#include "tassel/metrics.hpp"

namespace tassel {

using nlohmann::json;

template <typename Real>
void adam_step(std::span<const ParamRef<Real>> params, OptimizerState<Real>& state) {
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.push_back(Tensor<Real>::zeros(p.var.shape()));
            state.second_moment.push_back(Tensor<Real>::zeros(p.var.shape()));
        }
    }
    if (state.first_moment.size() != params.size()) throw InternalError("optimizer state does not match parameters");
    ++state.step;
    const auto& c = state.config;
    const double corr1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    const Real b1 = static_cast<Real>(c.beta1), b2 = static_cast<Real>(c.beta2);
    const Real step_size = static_cast<Real>(c.lr / corr1);
    const Real inv_corr2 = static_cast<Real>(1.0 / corr2);
    const Real eps = static_cast<Real>(c.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Var<Real> var = params[i].var;
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        if (!m.same_shape(var.value())) throw InternalError("moment shape mismatch for " + params[i].name);
        auto value = var.mutable_value().data();
        auto md = m.data();
        auto vd = v.data();
        const bool has_grad = var.node()->has_grad();
        const Real* g = has_grad ? var.node()->grad.ptr() : nullptr;
        for (std::size_t j = 0; j < value.size(); ++j) {
            const Real gj = g ? g[j] : Real(0);
            md[j] = b1 * md[j] + (Real(1) - b1) * gj;
            vd[j] = b2 * vd[j] + (Real(1) - b2) * gj * gj;
            value[j] -= step_size * md[j] / (std::sqrt(vd[j] * inv_corr2) + eps);
        }
    }
}

template void adam_step<float>(std::span<const ParamRef<float>>, OptimizerState<float>&);
template void adam_step<double>(std::span<const ParamRef<double>>, OptimizerState<double>&);

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (n_components < 1) throw ConfigError("n_components must be >= 1");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (report_every < 0) throw ConfigError("report_every must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
    if (conv_filters < 1 || wide_filters < 1 || head_units < 1) throw ConfigError("layer widths must be >= 1");
    if (kmeans_restarts < 1 || kmeans_max_iters < 1 || !(kmeans_tol >= 0.0))
        throw ConfigError("k-means settings must be positive");
}

json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"lr", c.lr},
            {"lambda", c.lambda},
            {"n_components", c.n_components},
            {"seed", c.seed},
            {"eval_every", c.eval_every},
            {"report_every", c.report_every},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"adam_eps", c.adam_eps},
            {"dropout", c.dropout},
            {"conv_filters", c.conv_filters},
            {"wide_filters", c.wide_filters},
            {"head_units", c.head_units},
            {"kmeans_restarts", c.kmeans_restarts},
            {"kmeans_max_iters", c.kmeans_max_iters},
            {"kmeans_tol", c.kmeans_tol}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
    if (!j.is_object()) throw ConfigError("training configuration must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "epochs") c.epochs = value.get<int>();
            else if (key == "batch_size") c.batch_size = value.get<int>();
            else if (key == "lr") c.lr = value.get<double>();
            else if (key == "lambda") c.lambda = value.get<double>();
            else if (key == "n_components") c.n_components = value.get<int>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "eval_every") c.eval_every = value.get<int>();
            else if (key == "report_every") c.report_every = value.get<int>();
            else if (key == "beta1") c.beta1 = value.get<double>();
            else if (key == "beta2") c.beta2 = value.get<double>();
            else if (key == "adam_eps") c.adam_eps = value.get<double>();
            else if (key == "dropout") c.dropout = value.get<double>();
            else if (key == "conv_filters") c.conv_filters = value.get<int>();
            else if (key == "wide_filters") c.wide_filters = value.get<int>();
            else if (key == "head_units") c.head_units = value.get<int>();
            else if (key == "kmeans_restarts") c.kmeans_restarts = value.get<int>();
            else if (key == "kmeans_max_iters") c.kmeans_max_iters = value.get<int>();
            else if (key == "kmeans_tol") c.kmeans_tol = value.get<double>();
            else throw ConfigError("unknown training option '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad training option value: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const FitReport& r) {
    return {{"train_loss", r.train_loss},
            {"eval_epochs", r.eval_epochs},
            {"val_weighted_f1", r.val_weighted_f1},
            {"selected_epoch", r.selected_epoch},
            {"best_val_weighted_f1", r.best_val_f1}};
}

std::string fit_trace_csv(const FitReport& r) {
    std::string out = "epoch,train_loss,val_weighted_f1\n";
    std::size_t next_eval = 0;
    char buf[96];
    for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
        const int epoch = static_cast<int>(e) + 1;
        std::snprintf(buf, sizeof buf, "%d,%.9g,", epoch, r.train_loss[e]);
        out += buf;
        if (next_eval < r.eval_epochs.size() && r.eval_epochs[next_eval] == epoch) {
            std::snprintf(buf, sizeof buf, "%.9g", r.val_weighted_f1[next_eval]);
            out += buf;
            ++next_eval;
        }
        out += '\n';
    }
    return out;
}

std::size_t select_best(std::span<const double> scores) {
    if (scores.empty()) throw ContractError("no validation scores to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

namespace {

template <typename Model>
std::vector<Tensor<float>> snapshot(Model& model) {
    std::vector<Tensor<float>> state;
    for (const auto& p : model.parameters()) state.push_back(p.var.value());
    for (const auto& b : model.buffers()) state.push_back(*b.tensor);
    return state;
}

template <typename Model>
void restore(Model& model, const std::vector<Tensor<float>>& state) {
    std::size_t i = 0;
    for (auto& p : model.parameters()) {
        Var<float> v = p.var;
        v.mutable_value() = state[i++];
    }
    for (auto& b : model.buffers()) *b.tensor = state[i++];
}

}  // namespace

template <typename Model>
FitReport fit(Model& model, std::span<const ComponentSet> train, std::span<const int> train_labels,
              std::span<const ComponentSet> val, std::span<const int> val_labels, int classes,
              const TrainConfig& config) {
    config.validate();
    if (train.empty() || val.empty()) throw ContractError("training and validation sets must be non-empty");
    if (train.size() != train_labels.size() || val.size() != val_labels.size())
        throw ContractError("one label per training/validation object is required");

    const auto started = std::chrono::steady_clock::now();
    FitReport report;
    const auto params = model.parameters();
    OptimizerState<float> opt;
    opt.config = config.adam();
    Rng dropout_rng(derive_seed(config.seed, "dropout"));
    std::vector<std::size_t> order(train.size());
    std::vector<Tensor<float>> best_state;
    double best_score = -1.0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(std::span<std::size_t>(order));

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<const ComponentSet*> batch;
            std::vector<int> labels;
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(&train[order[i]]);
                labels.push_back(train_labels[order[i]]);
            }
            for (const auto& p : params) {
                Var<float> v = p.var;
                v.zero_grad();
            }
            auto loss = model.loss(batch, labels, config.lambda, dropout_rng);
            if (!std::isfinite(loss.total.value().item())) throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch));
            backward(loss.total);
            adam_step<float>(params, opt);
            loss_sum += static_cast<double>(loss.total.value().item()) * static_cast<double>(batch.size());
        }
        report.train_loss.push_back(loss_sum / static_cast<double>(train.size()));

        if (epoch % config.eval_every == 0 || epoch == config.epochs) {
            const auto predicted = model.predict_labels(val);
            const double score = metrics(confusion(predicted, val_labels, classes)).weighted_f1;
            if (!std::isfinite(score))
                throw NumericError("validation weighted F1 is not finite at epoch " + std::to_string(epoch));
            report.eval_epochs.push_back(epoch);
            report.val_weighted_f1.push_back(score);
            if (score > best_score) {
                best_score = score;
                best_state = snapshot(model);
                report.selected_epoch = epoch;
            }
        }
        if (config.report_every > 0 && epoch % config.report_every == 0) {
            std::fprintf(stderr, "epoch %d  loss %.5f  best val F1 %.4f (epoch %d)\n", epoch, report.train_loss.back(),
                         best_score, report.selected_epoch);
        }
    }
    report.best_val_f1 = best_score;
    restore(model, best_state);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

template FitReport fit<TasselNet<float>>(TasselNet<float>&, std::span<const ComponentSet>, std::span<const int>,
                                         std::span<const ComponentSet>, std::span<const int>, int, const TrainConfig&);
template FitReport fit<BaselineMlp<float>>(BaselineMlp<float>&, std::span<const ComponentSet>, std::span<const int>,
                                           std::span<const ComponentSet>, std::span<const int>, int,
                                           const TrainConfig&);

}  // namespace tassel
