#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tassel {

struct GridCoord {
    std::int32_t row = 0;
    std::int32_t col = 0;
    auto operator<=>(const GridCoord&) const = default;
};

/// One labeled analysis unit: a bag of pixel time series sharing a label.
/// Pixel values are stored contiguously as P x T x B.
struct SitsObject {
    std::string id;
    std::optional<int> label;
    std::int64_t length = 0;  // T
    std::int64_t bands = 0;   // B
    std::vector<float> values;
    std::vector<GridCoord> coords;  // empty, or one per pixel

    std::size_t pixel_count() const {
        const auto stride = static_cast<std::size_t>(length * bands);
        return stride ? values.size() / stride : 0;
    }
    std::int64_t pixel_size() const { return length * bands; }
    bool has_coords() const { return !coords.empty(); }

    std::span<const float> pixel(std::size_t p) const {
        const auto stride = static_cast<std::size_t>(pixel_size());
        return std::span<const float>(values).subspan(p * stride, stride);
    }
};

struct Dataset {
    std::int64_t length = 0;  // T
    std::int64_t bands = 0;   // B
    std::vector<std::string> class_names;
    std::vector<SitsObject> objects;

    std::size_t size() const { return objects.size(); }
    std::size_t class_count() const { return class_names.size(); }

    /// Throws SchemaError when any dataset invariant is broken.
    void validate() const;

    /// Objects at `indices`, in the given order.
    Dataset subset(std::span<const std::size_t> indices) const;

    /// Labels of every object; throws ContractError on unlabeled objects.
    std::vector<int> labels() const;
};

Dataset read_ndjson(std::istream& in);
Dataset load_ndjson(const std::filesystem::path& path);
void write_ndjson(const Dataset& ds, std::ostream& out);
void save_ndjson(const Dataset& ds, const std::filesystem::path& path);
std::string to_ndjson(const Dataset& ds);

/// Per-band extrema of the training pixels, defining the [0, 1] mapping.
struct NormStats {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t bands() const { return min.size(); }
    bool degenerate(std::size_t band) const { return !(max[band] > min[band]); }
};

NormStats fit_normalizer(const Dataset& train);

/// Maps every band affinely so the training minimum goes to 0 and the
/// maximum to 1, clamping to [0, 1]. Degenerate bands map to 0.
Dataset apply_normalizer(const Dataset& ds, const NormStats& stats);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

struct DatasetSplit {
    Dataset train;
    Dataset validation;
    Dataset test;
};

inline constexpr std::array<double, 3> kDefaultSplit{0.5, 0.2, 0.3};

/// Stratified, object-level train/validation/test split. Each class is
/// shuffled with the "split" stream of `seed` and apportioned with the
/// largest-remainder rule; classes with fewer than three objects go wholly
/// to training. Indices within each part are ascending.
SplitIndices split_indices(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed);
DatasetSplit split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed);

/// Shortest decimal text that reads back as the same float.
std::string format_float(float v);

}  // namespace tassel
