#include <numeric>

#include "doctest.h"
#include "tassel/explain.hpp"

using namespace tassel;
using doctest::Approx;

namespace {

ComponentSet components(std::string id, int slots, int effective_k, std::vector<int> assignment) {
    ComponentSet s;
    s.object_id = std::move(id);
    s.length = 1;
    s.bands = 1;
    s.slots = slots;
    s.effective_k = effective_k;
    s.centroids.assign(static_cast<std::size_t>(slots), 0.0f);
    s.assignment = std::move(assignment);
    return s;
}

PredictionRecord prediction(std::string id, std::vector<double> alpha) {
    PredictionRecord r;
    r.object_id = std::move(id);
    r.alpha = std::move(alpha);
    return r;
}

}  // namespace

TEST_SUITE("explain") {

TEST_CASE("single component gives every pixel alpha one") {
    auto cs = components("o", 3, 1, {0, 0, 0, 0});
    auto map = build_map(prediction("o", {0.2, 0.5, 0.3}), cs);
    for (double a : map.pixel_alpha) CHECK(a == Approx(1.0));
}

TEST_CASE("two components reproduce alpha from the assignment") {
    auto cs = components("o", 2, 2, {1, 0, 0, 1, 1});
    auto map = build_map(prediction("o", {0.9, 0.1}), cs);
    std::vector<double> sums(2, 0.0);
    std::vector<int> counts(2, 0);
    for (std::size_t p = 0; p < map.pixel_alpha.size(); ++p) {
        sums[static_cast<std::size_t>(cs.assignment[p])] += map.pixel_alpha[p];
        ++counts[static_cast<std::size_t>(cs.assignment[p])];
    }
    CHECK(sums[0] / counts[0] == Approx(0.9));
    CHECK(sums[1] / counts[1] == Approx(0.1));
    CHECK(std::accumulate(map.component_alpha.begin(), map.component_alpha.end(), 0.0) == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("relabeling components leaves the pixel map unchanged") {
    auto a = build_map(prediction("o", {0.7, 0.2, 0.1}), components("o", 3, 3, {0, 1, 2, 2, 0}));
    auto b = build_map(prediction("o", {0.1, 0.7, 0.2}), components("o", 3, 3, {1, 2, 0, 0, 1}));
    CHECK(a.pixel_alpha == b.pixel_alpha);
}

TEST_CASE("mismatched ids are rejected") {
    CHECK_THROWS_AS(build_map(prediction("a", {1.0}), components("b", 1, 1, {0})), ContractError);
}

TEST_CASE("2x2 raster with two alpha levels") {
    auto cs = components("o", 2, 2, {0, 0, 1, 1});
    auto map = build_map(prediction("o", {0.1, 0.9}), cs, std::vector<GridCoord>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    CHECK(render_pgm(map, 2) == "P2\n2 2\n1\n0 0\n1 1\n");
}

TEST_CASE("uniform alpha goes to the top bin") {
    std::vector<double> same(7, 0.25);
    for (int b : quantile_bins(same, 5)) CHECK(b == 4);
}

TEST_CASE("values on an edge fall in the lower bin") {
    std::vector<double> v{0.0, 1.0, 2.0, 3.0, 4.0};
    auto edges = quantile_edges(v, 2);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0] == 2.0);
    CHECK(quantile_bins(v, 2) == std::vector<int>{0, 0, 0, 1, 1});
    CHECK(quantile_bins(v, 5) == std::vector<int>{0, 1, 2, 3, 4});
    std::vector<double> ties{0.1, 0.1, 0.1, 0.9};
    CHECK(quantile_bins(ties, 2) == std::vector<int>{0, 0, 0, 1});
}

TEST_CASE("outside cells use the maxval sentinel") {
    auto cs = components("o", 2, 2, {0, 1, 1});
    auto map = build_map(prediction("o", {0.8, 0.2}), cs, std::vector<GridCoord>{{5, 5}, {5, 6}, {6, 5}});
    CHECK(render_pgm(map, 5) == "P2\n2 2\n4\n4 0\n0 4\n");
    auto side = pgm_sidecar(map, 5);
    CHECK(side.at("outside_value") == 4);
    CHECK(side.at("row_offset") == 5);
}

TEST_CASE("rendering without coordinates is unsupported") {
    auto map = build_map(prediction("o", {1.0}), components("o", 1, 1, {0, 0}));
    CHECK_THROWS_AS(render_pgm(map), UnsupportedError);
    CHECK(UnsupportedError("x").exit_code() == 1);
}

TEST_CASE("CSV export") {
    auto cs = components("o", 3, 2, {0, 1, 1});
    auto map = build_map(prediction("o", {0.5, 0.3, 0.2}), cs, std::vector<GridCoord>{{0, 0}, {0, 1}, {1, 0}});
    const auto csv = export_csv(map, 2);
    CHECK(csv == "object_id,pixel_index,row,col,alpha,bin\no,0,0,0,0.7,1\no,1,0,1,0.3,0\no,2,1,0,0.3,0\n");
    auto plain = build_map(prediction("o", {0.5, 0.3, 0.2}), cs);
    CHECK(export_csv(plain, 2).find("o,0,,,0.7,1") != std::string::npos);
}

}
