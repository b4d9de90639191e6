#include <cstdlib>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "tassel/components.hpp"
#include "tassel/error.hpp"

using namespace tassel;
using doctest::Approx;

namespace {

SitsObject scalar_object(const std::string& id, std::vector<float> values) {
    SitsObject o;
    o.id = id;
    o.label = 0;
    o.length = 1;
    o.bands = 1;
    o.values = std::move(values);
    return o;
}

SitsObject random_object(Rng& rng, const std::string& id, std::size_t pixels, std::int64_t T, std::int64_t B) {
    SitsObject o;
    o.id = id;
    o.label = 0;
    o.length = T;
    o.bands = B;
    for (std::size_t i = 0; i < pixels * static_cast<std::size_t>(T * B); ++i) o.values.push_back(static_cast<float>(rng.uniform()));
    return o;
}

}  // namespace

TEST_SUITE("components") {

TEST_CASE("two well separated pairs") {
    auto cs = extract_components(scalar_object("o", {0, 1, 10, 11}), 2, 1);
    CHECK(cs.effective_k == 2);
    std::vector<float> centroids{cs.centroid(0)[0], cs.centroid(1)[0]};
    std::sort(centroids.begin(), centroids.end());
    CHECK(centroids == std::vector<float>{0.5f, 10.5f});
    CHECK(cs.assignment[0] == cs.assignment[1]);
    CHECK(cs.assignment[2] == cs.assignment[3]);
    CHECK(cs.assignment[0] != cs.assignment[2]);
}

TEST_CASE("one component is the per-feature mean") {
    Rng rng(4);
    auto obj = random_object(rng, "o", 9, 3, 2);
    auto cs = extract_components(obj, 1, 0);
    for (std::size_t f = 0; f < 6; ++f) {
        double mean = 0;
        for (std::size_t p = 0; p < 9; ++p) mean += obj.values[p * 6 + f];
        CHECK(cs.centroid(0)[f] == Approx(mean / 9).epsilon(1e-6));
    }
}

TEST_CASE("too few distinct pixels pad cyclically") {
    auto cs = extract_components(scalar_object("o", {3, 3, 3}), 6, 0);
    CHECK(cs.effective_k == 1);
    CHECK(cs.slots == 6);
    for (int l = 0; l < 6; ++l) {
        CHECK(cs.centroid(l)[0] == 3.0f);
        CHECK(cs.source_of(l) == 0);
        CHECK(cs.is_padding(l) == (l > 0));
    }
    auto two = extract_components(scalar_object("o", {1, 5, 1, 5, 5}), 5, 0);
    CHECK(two.effective_k == 2);
    for (int l = 2; l < 5; ++l) CHECK(two.centroid(l)[0] == two.centroid(l % 2)[0]);
    CHECK_THROWS_AS(extract_components(scalar_object("o", {1}), 0, 0), ConfigError);
}

TEST_CASE("restarted k-means++ reaches the exhaustive optimum") {
    Rng rng(77);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n = 2 + rng.below(7);
        const std::size_t dim = 1 + rng.below(3);
        const int k = 1 + static_cast<int>(rng.below(std::min<std::uint64_t>(3, n)));
        std::vector<double> pts;
        for (std::size_t i = 0; i < n * dim; ++i) pts.push_back(rng.uniform(-5, 5));
        // 10 restarts miss the optimum on roughly 1% of such instances
        auto res = kmeans(pts, n, dim, k, rng.next(), KMeansOptions{50, 100, 1e-6});
        CHECK(std::abs(res.inertia - oracle::exhaustive_min_inertia(pts, n, dim, k)) < 1e-9);
        for (const auto& trace : res.inertia_traces)
            for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
    }
}

TEST_CASE("assignment is a partition and beats a random assignment") {
    Rng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t pixels = 5 + rng.below(30);
        auto obj = random_object(rng, "o" + std::to_string(rep), pixels, 4, 2);
        const int L = 1 + static_cast<int>(rng.below(6));
        auto cs = extract_components(obj, L, rep);
        REQUIRE(cs.assignment.size() == pixels);
        std::set<int> used(cs.assignment.begin(), cs.assignment.end());
        CHECK(static_cast<int>(used.size()) == cs.effective_k);
        for (int a : cs.assignment) CHECK((a >= 0 && a < cs.effective_k));

        std::vector<double> pts(obj.values.begin(), obj.values.end());
        std::vector<double> cents(cs.centroids.begin(), cs.centroids.begin() + cs.effective_k * 8);
        std::vector<int> random_assign;
        for (std::size_t p = 0; p < pixels; ++p) random_assign.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(cs.effective_k))));
        std::vector<double> random_cents(static_cast<std::size_t>(cs.effective_k) * 8, 0.0);
        std::vector<int> counts(static_cast<std::size_t>(cs.effective_k), 0);
        for (std::size_t p = 0; p < pixels; ++p) {
            ++counts[static_cast<std::size_t>(random_assign[p])];
            for (std::size_t f = 0; f < 8; ++f) random_cents[static_cast<std::size_t>(random_assign[p]) * 8 + f] += pts[p * 8 + f];
        }
        for (std::size_t c = 0; c < counts.size(); ++c)
            for (std::size_t f = 0; f < 8; ++f) random_cents[c * 8 + f] /= std::max(1, counts[c]);
        CHECK(inertia_of(pts, 8, cs.assignment, cents) <= inertia_of(pts, 8, random_assign, random_cents) + 1e-5);
    }
}

TEST_CASE("extract_all keeps input order and ignores the worker count") {
    Rng rng(3);
    Dataset ds;
    ds.length = 5;
    ds.bands = 2;
    ds.class_names = {"a"};
    for (int i = 0; i < 12; ++i) ds.objects.push_back(random_object(rng, "obj" + std::to_string(i), 6 + i, 5, 2));
    setenv("TASSEL_THREADS", "1", 1);
    auto sequential = extract_all(ds, 3, 42);
    setenv("TASSEL_THREADS", "4", 1);
    auto parallel = extract_all(ds, 3, 42);
    unsetenv("TASSEL_THREADS");
    REQUIRE(sequential.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(sequential[i].object_id == ds.objects[i].id);
        CHECK(sequential[i].centroids == parallel[i].centroids);
        CHECK(sequential[i].assignment == parallel[i].assignment);
    }
}

TEST_CASE("errors name the failing object") {
    Dataset ds;
    ds.length = 1;
    ds.bands = 1;
    ds.class_names = {"a"};
    ds.objects.push_back(scalar_object("fine", {1, 2}));
    try {
        extract_all(ds, 0, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("fine") != std::string::npos);
    }
}

TEST_CASE("component cache round-trip") {
    Rng rng(8);
    Dataset ds;
    ds.length = 3;
    ds.bands = 2;
    ds.class_names = {"a"};
    for (int i = 0; i < 4; ++i) ds.objects.push_back(random_object(rng, "o" + std::to_string(i), 2 + i, 3, 2));
    auto sets = extract_all(ds, 3, 5);
    const auto path = component_cache_path(std::filesystem::temp_directory_path() / "tassel_unit" / "ds.ndjson", 3);
    CHECK(path.filename() == "ds.ndjson.components.L3.ndjson");
    ComponentCacheHeader header{3, 5, 3, 2, {}, "abc"};
    save_components(path, header, sets);
    ComponentCacheHeader back_header;
    auto back = load_components(path, &back_header);
    CHECK(back_header.norm_digest == "abc");
    REQUIRE(back.size() == sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
        CHECK(back[i].object_id == sets[i].object_id);
        CHECK(back[i].effective_k == sets[i].effective_k);
        CHECK(back[i].centroids == sets[i].centroids);
        CHECK(back[i].assignment == sets[i].assignment);
    }
}

}
