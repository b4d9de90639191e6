#include "tassel/explain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace tassel {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Box {
    int row0 = 0, col0 = 0, height = 0, width = 0;
};

Box bounding_box(std::span<const GridCoord> coords) {
    Box box;
    int r1 = coords[0].row, c1 = coords[0].col;
    box.row0 = r1;
    box.col0 = c1;
    for (const auto& g : coords) {
        box.row0 = std::min(box.row0, g.row);
        box.col0 = std::min(box.col0, g.col);
        r1 = std::max(r1, g.row);
        c1 = std::max(c1, g.col);
    }
    box.height = r1 - box.row0 + 1;
    box.width = c1 - box.col0 + 1;
    return box;
}

void check_bins(int bins) {
    if (bins < 2) throw ConfigError("at least 2 bins are required, got " + std::to_string(bins));
}

}  // namespace

AttentionMap build_map(const PredictionRecord& prediction, const ComponentSet& components,
                       std::span<const GridCoord> coords) {
    if (prediction.object_id != components.object_id)
        throw ContractError("prediction for '" + prediction.object_id + "' paired with components of '" +
                            components.object_id + "'");
    if (!coords.empty() && coords.size() != components.assignment.size())
        throw ContractError("object '" + components.object_id + "' has " + std::to_string(coords.size()) +
                            " coordinates for " + std::to_string(components.assignment.size()) + " pixels");
    AttentionMap map;
    map.object_id = components.object_id;
    map.component_alpha = prediction.component_alpha.empty() ? merge_alpha(prediction.alpha, components)
                                                             : prediction.component_alpha;
    if (static_cast<int>(map.component_alpha.size()) != components.effective_k)
        throw ContractError("object '" + components.object_id + "' alpha does not match its component count");
    map.assignment = components.assignment;
    map.pixel_alpha.reserve(map.assignment.size());
    for (int a : map.assignment) map.pixel_alpha.push_back(map.component_alpha[static_cast<std::size_t>(a)]);
    map.coords.assign(coords.begin(), coords.end());
    return map;
}

std::vector<double> quantile_edges(std::span<const double> values, int bins) {
    check_bins(bins);
    if (values.empty()) throw ContractError("quantiles of an empty set");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double last = static_cast<double>(sorted.size() - 1);
    std::vector<double> edges;
    for (int i = 1; i < bins; ++i) {
        const double pos = last * i / bins;
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        edges.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
    }
    return edges;
}

std::vector<int> quantile_bins(std::span<const double> values, int bins) {
    const auto edges = quantile_edges(values, bins);
    const bool flat = std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
    std::vector<int> out;
    out.reserve(values.size());
    for (double v : values) {
        if (flat) {
            out.push_back(bins - 1);
            continue;
        }
        out.push_back(static_cast<int>(std::count_if(edges.begin(), edges.end(), [&](double e) { return v > e; })));
    }
    return out;
}

std::string render_pgm(const AttentionMap& map, int bins) {
    check_bins(bins);
    if (!map.has_coords())
        throw UnsupportedError("object '" + map.object_id +
                               "' has no pixel coordinates, so it cannot be rasterized; export CSV instead");
    const Box box = bounding_box(map.coords);
    const int maxval = bins - 1;
    std::vector<int> grid(static_cast<std::size_t>(box.width) * static_cast<std::size_t>(box.height), maxval);
    const auto levels = quantile_bins(map.pixel_alpha, bins);
    for (std::size_t p = 0; p < map.coords.size(); ++p) {
        const auto r = static_cast<std::size_t>(map.coords[p].row - box.row0);
        const auto c = static_cast<std::size_t>(map.coords[p].col - box.col0);
        grid[r * static_cast<std::size_t>(box.width) + c] = levels[p];
    }
    std::string out = "P2\n" + std::to_string(box.width) + " " + std::to_string(box.height) + "\n" +
                      std::to_string(maxval) + "\n";
    for (int r = 0; r < box.height; ++r) {
        for (int c = 0; c < box.width; ++c) {
            if (c) out += ' ';
            out += std::to_string(grid[static_cast<std::size_t>(r) * static_cast<std::size_t>(box.width) + static_cast<std::size_t>(c)]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json pgm_sidecar(const AttentionMap& map, int bins) {
    check_bins(bins);
    if (!map.has_coords())
        throw UnsupportedError("object '" + map.object_id + "' has no pixel coordinates");
    const Box box = bounding_box(map.coords);
    return {{"object_id", map.object_id},
            {"width", box.width},
            {"height", box.height},
            {"row_offset", box.row0},
            {"col_offset", box.col0},
            {"bins", bins},
            {"maxval", bins - 1},
            {"outside_value", bins - 1},
            {"outside_note", "cells without an object pixel are written as maxval"},
            {"edges", quantile_edges(map.pixel_alpha, bins)},
            {"component_alpha", map.component_alpha}};
}

std::string csv_header() { return "object_id,pixel_index,row,col,alpha,bin"; }

std::string export_csv(const AttentionMap& map, int bins) {
    const auto levels = quantile_bins(map.pixel_alpha, bins);
    std::string out = csv_header() + "\n";
    for (std::size_t p = 0; p < map.pixel_alpha.size(); ++p) {
        out += map.object_id + "," + std::to_string(p) + ",";
        if (map.has_coords()) out += std::to_string(map.coords[p].row) + "," + std::to_string(map.coords[p].col);
        else out += ",";
        out += "," + format_double(map.pixel_alpha[p]) + "," + std::to_string(levels[p]) + "\n";
    }
    return out;
}

}  // namespace tassel
