#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tassel/checkpoint.hpp"
#include "tassel/pipeline.hpp"
#include "tassel/synth.hpp"
#include "tassel/training.hpp"

using namespace tassel;
using doctest::Approx;

namespace {

TrainConfig small_config() {
    TrainConfig c;
    c.epochs = 30;
    c.batch_size = 8;
    c.lr = 1e-3;
    c.n_components = 2;
    c.eval_every = 5;
    c.dropout = 0.1;
    c.conv_filters = 8;
    c.wide_filters = 8;
    c.head_units = 16;
    return c;
}

Dataset toy_dataset(int per_class, std::uint64_t seed) {
    SynthConfig s;
    s.classes = 2;
    s.objects_per_class = per_class;
    s.length = 12;
    s.bands = 2;
    s.min_pixels = 6;
    s.max_pixels = 10;
    s.seed = seed;
    return generate(s).dataset;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("first Adam step moves by the learning rate") {
    auto p = parameter(Tensor<double>({1}, 0.0));
    std::vector<ParamRef<double>> params{{"p", p}};
    OptimizerState<double> state;
    state.config.lr = 1e-4;
    p.node()->accumulate(std::vector<double>{1.0});
    adam_step<double>(params, state);
    CHECK(p.value().item() == Approx(-1e-4).epsilon(1e-6));
    CHECK(state.step == 1);
}

TEST_CASE("Adam with zero gradients keeps parameters and decays moments") {
    auto p = parameter(Tensor<double>({3}, 0.5));
    std::vector<ParamRef<double>> params{{"p", p}};
    OptimizerState<double> state;
    p.node()->accumulate(std::vector<double>{1.0, -2.0, 0.5});
    adam_step<double>(params, state);
    const auto value = p.value();
    const auto m = state.first_moment[0];
    const auto v = state.second_moment[0];
    p.zero_grad();
    adam_step<double>(params, state);
    // The stale moments still move the parameter; with zero gradient the
    // update comes only from decayed moments, never from a new gradient.
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(state.first_moment[0].data()[i] == Approx(0.9 * m.data()[i]));
        CHECK(state.second_moment[0].data()[i] == Approx(0.999 * v.data()[i]));
    }
    auto q = parameter(Tensor<double>({2}, 1.5));
    std::vector<ParamRef<double>> qs{{"q", q}};
    OptimizerState<double> fresh;
    adam_step<double>(qs, fresh);
    adam_step<double>(qs, fresh);
    CHECK(q.value().to_vector() == std::vector<double>{1.5, 1.5});
}

TEST_CASE("Adam rejects mismatched state") {
    auto p = parameter(Tensor<double>({2}, 0.0));
    std::vector<ParamRef<double>> params{{"p", p}};
    OptimizerState<double> state;
    state.first_moment.push_back(Tensor<double>::zeros({3}));
    state.second_moment.push_back(Tensor<double>::zeros({3}));
    CHECK_THROWS_AS(adam_step<double>(params, state), InternalError);
}

TEST_CASE("configuration JSON round-trip and validation") {
    TrainConfig c = small_config();
    c.seed = 12345678901234ULL;
    auto back = train_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(train_config_from_json({{"epochs", 7}}).epochs == 7);
    CHECK_THROWS_AS(train_config_from_json({{"lambda", 1.5}}), ConfigError);
    CHECK_THROWS_AS(train_config_from_json({{"epochz", 3}}), ConfigError);
    CHECK_THROWS_AS(train_config_from_json({{"epochs", "many"}}), ConfigError);
    TrainConfig defaults;
    CHECK(defaults.epochs == 5000);
    CHECK(defaults.batch_size == 32);
    CHECK(defaults.lr == 1e-4);
    CHECK(defaults.lambda == 0.5);
    CHECK(defaults.n_components == 6);
}

TEST_CASE("model selection takes the earliest best score") {
    std::vector<double> scores{0.2, 0.7, 0.5, 0.7, 0.1};
    CHECK(select_best(scores) == 1);
    std::vector<double> flat{0.3, 0.3};
    CHECK(select_best(flat) == 0);
    CHECK_THROWS_AS(select_best(std::vector<double>{}), ContractError);
}

TEST_CASE("fit reports a consistent trace and selected epoch") {
    auto split = prepare_split(toy_dataset(10, 1), 2, 0);
    auto config = small_config();
    config.epochs = 12;
    FitReport report;
    train_tassel(split, config, &report);
    CHECK(report.train_loss.size() == 12);
    CHECK(report.eval_epochs == std::vector<int>{5, 10, 12});
    const auto best = select_best(report.val_weighted_f1);
    CHECK(report.selected_epoch == report.eval_epochs[best]);
    CHECK(report.best_val_f1 == report.val_weighted_f1[best]);
    const auto csv = fit_trace_csv(report);
    CHECK(csv.rfind("epoch,train_loss,val_weighted_f1\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}

TEST_CASE("training is deterministic down to checkpoint bytes") {
    auto data = toy_dataset(8, 2);
    auto config = small_config();
    config.epochs = 6;
    auto run = [&]() {
        auto split = prepare_split(data, 2, 3);
        FitReport report;
        auto model = train_tassel(split, config, &report);
        return std::pair{serialize_checkpoint(model), to_json(report).dump()};
    };
    auto a = run();
    auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("auxiliary parameters get no gradient without the auxiliary loss") {
    Rng rng(5);
    auto cfg = oracle::reduced_config(8, 2, 3, 2);
    cfg.conv_filters = 4;
    cfg.wide_filters = 4;
    cfg.head_units = 4;
    TasselNet<float> net(cfg, 3);
    std::vector<ComponentSet> sets{oracle::random_components(rng, "a", 8, 2, 2), oracle::random_components(rng, "b", 8, 2, 2)};
    std::vector<const ComponentSet*> batch{&sets[0], &sets[1]};
    std::vector<int> labels{0, 1};
    backward(net.loss(batch, labels, 0.0, rng).total);
    for (const auto& p : net.parameters()) {
        if (p.name.rfind("aux.", 0) != 0) continue;
        for (float g : p.var.grad().data()) CHECK(g == 0.0f);
    }
}

TEST_CASE("an 8-object toy problem is fit exactly") {
    auto data = toy_dataset(4, 3);
    auto split = prepare_split(data, 2, 0);
    // train on every object, validate on the same set
    std::vector<ComponentSet> all = extract_all(apply_normalizer(data, split.norm), 2, 0);
    auto labels = data.labels();
    auto config = small_config();
    config.epochs = 300;
    config.eval_every = 10;
    config.lambda = 0.5;
    TasselNet<float> net(model_config(config, data), 0);
    auto report = fit(net, std::span<const ComponentSet>(all), labels, std::span<const ComponentSet>(all), labels, 2, config);
    auto predicted = net.predict_labels(all);
    CHECK(predicted == labels);

    // smoothed loss goes down
    auto window = [&](std::size_t from) {
        double s = 0;
        for (std::size_t i = from; i < from + 20; ++i) s += report.train_loss[i];
        return s / 20;
    };
    CHECK(window(report.train_loss.size() - 20) < window(0));
}

TEST_CASE("the baseline trains through the same loop") {
    auto split = prepare_split(toy_dataset(10, 4), 2, 1);
    auto config = small_config();
    config.epochs = 5;
    FitReport report;
    auto eval = run_baseline(split, config, &report);
    CHECK(report.train_loss.size() == 5);
    CHECK(eval.confusion.total() == static_cast<std::int64_t>(split.test.size()));
}

}
