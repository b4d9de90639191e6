#include "doctest.h"
#include "oracles.hpp"
#include "tassel/baseline.hpp"
#include "tassel/metrics.hpp"

using namespace tassel;
using doctest::Approx;

TEST_SUITE("evaluation") {

TEST_CASE("confusion examples") {
    std::vector<int> labels{0, 1, 2, 1};
    auto diag = confusion(labels, labels, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(diag.at(i, j) == (i == j ? (i == 1 ? 2 : 1) : 0));
    auto empty = confusion(std::vector<int>{}, std::vector<int>{}, 2);
    CHECK(empty.total() == 0);
    auto hand = confusion(std::vector<int>{0, 1, 1}, std::vector<int>{0, 0, 1}, 2);
    CHECK(hand.at(0, 0) == 1);
    CHECK(hand.at(0, 1) == 1);
    CHECK(hand.at(1, 0) == 0);
    CHECK(hand.at(1, 1) == 1);
    CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{0, 1}, 2), ContractError);
    CHECK_THROWS_AS(metrics(empty), ContractError);
}

TEST_CASE("metric examples") {
    auto perfect = metrics(confusion(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 2}, 3));
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.kappa == 1.0);
    for (double f : perfect.f1) CHECK(f == 1.0);

    ConfusionMatrix even(2);
    even.add(0, 0);
    even.add(0, 1);
    even.add(1, 0);
    even.add(1, 1);
    auto m = metrics(even);
    CHECK(m.accuracy == 0.5);
    CHECK(m.kappa == 0.0);

    // class 0: tp=1, fp=1, fn=1
    auto f = metrics(confusion(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}, 2));
    CHECK(f.f1[0] == Approx(0.5));
}

TEST_CASE("metrics agree with a brute-force recount") {
    Rng rng(2718);
    for (int rep = 0; rep < 300; ++rep) {
        const int classes = 1 + static_cast<int>(rng.below(6));
        const std::size_t n = 1 + rng.below(60);
        std::vector<int> p, t;
        for (std::size_t i = 0; i < n; ++i) {
            p.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
            t.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
        }
        auto got = metrics(confusion(p, t, classes));
        auto want = oracle::brute_metrics(p, t, classes);
        CHECK(std::abs(got.accuracy - want.accuracy) < 1e-9);
        CHECK(std::abs(got.kappa - want.kappa) < 1e-9);
        CHECK(std::abs(got.weighted_f1 - want.weighted_f1) < 1e-9);
        CHECK(std::abs(got.macro_f1 - want.macro_f1) < 1e-9);
        for (int c = 0; c < classes; ++c) {
            CHECK(std::abs(got.precision[static_cast<std::size_t>(c)] - want.precision[static_cast<std::size_t>(c)]) < 1e-9);
            CHECK(std::abs(got.recall[static_cast<std::size_t>(c)] - want.recall[static_cast<std::size_t>(c)]) < 1e-9);
        }
        CHECK(got.kappa >= -1.0);
        CHECK(got.kappa <= 1.0);
    }
}

TEST_CASE("weighted F1 equals macro F1 under equal supports") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<int> t, p;
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 5; ++k) {
                t.push_back(c);
                p.push_back(static_cast<int>(rng.below(4)));
            }
        auto m = metrics(confusion(p, t, 4));
        CHECK(m.weighted_f1 == Approx(m.macro_f1).epsilon(1e-12));
    }
}

TEST_CASE("serialization") {
    auto m = metrics(confusion(std::vector<int>{0, 1}, std::vector<int>{0, 0}, 2));
    std::vector<std::string> names{"a", "b"};
    auto j = to_json(m, names);
    CHECK(j.at("accuracy") == 0.5);
    CHECK(metric_csv_header() == "run,accuracy,kappa,weighted_f1,macro_f1,total");
    auto row = metric_csv_row("seed0", m);
    CHECK(row.rfind("seed0,", 0) == 0);
    CHECK(std::count(row.begin(), row.end(), ',') == 5);
    auto ms = mean_std(std::vector<double>{1, 2, 3, 4});
    CHECK(ms.mean == 2.5);
    CHECK(ms.std == Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("baseline consumes T*B mean vectors") {
    MlpConfig c;
    c.length = 6;
    c.bands = 3;
    c.classes = 2;
    c.hidden_units = 8;
    CHECK(c.input_dim() == 18);
    BaselineMlp<float> mlp(c, 0);
    Rng rng(1);
    std::vector<ComponentSet> sets{oracle::random_components(rng, "a", 6, 3, 1)};
    std::vector<const ComponentSet*> batch{&sets[0]};
    CHECK(mlp.forward(batch).dim(1) == 2);
    CHECK(mlp.parameters()[0].var.dim(0) == 18);
    std::vector<ComponentSet> two{oracle::random_components(rng, "b", 6, 3, 2)};
    CHECK_THROWS_AS(mlp.predict_labels(two), ConfigError);
}

}
