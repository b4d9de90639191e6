#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tassel/components.hpp"
#include "tassel/dataset.hpp"
#include "tassel/model.hpp"

namespace tassel {

/// Per-pixel attention: each pixel carries the (duplicate-merged) alpha of
/// the component it was assigned to.
struct AttentionMap {
    std::string object_id;
    std::vector<double> component_alpha;  // effective_k entries, sums to 1
    std::vector<int> assignment;
    std::vector<double> pixel_alpha;
    std::vector<GridCoord> coords;  // empty when the object has none

    bool has_coords() const { return !coords.empty(); }
};

AttentionMap build_map(const PredictionRecord& prediction, const ComponentSet& components,
                       std::span<const GridCoord> coords = {});

/// Interior quantile edges at i / bins (i = 1..bins-1), linearly
/// interpolated between order statistics.
std::vector<double> quantile_edges(std::span<const double> values, int bins);

/// Bin of each value: the number of edges it strictly exceeds, so a value
/// equal to an edge falls in the lower bin. When every value is equal all of
/// them go to the top bin.
std::vector<int> quantile_bins(std::span<const double> values, int bins);

inline constexpr int kDefaultBins = 5;

/// ASCII graymap (P2) over the object's bounding box with maxval bins-1.
/// Cells that hold no pixel of the object are written as maxval.
std::string render_pgm(const AttentionMap& map, int bins = kDefaultBins);

/// Describes the raster produced by render_pgm: placement, bin edges and the
/// value used for cells outside the object.
nlohmann::json pgm_sidecar(const AttentionMap& map, int bins = kDefaultBins);

std::string csv_header();
/// One row per pixel in pixel order, header included. Row and column are
/// blank when the object has no coordinates.
std::string export_csv(const AttentionMap& map, int bins = kDefaultBins);

}  // namespace tassel
