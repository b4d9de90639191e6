#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tassel/dataset.hpp"

namespace tassel {

struct KMeansOptions {
    int restarts = 10;
    int max_iters = 100;
    double tol = 1e-6;
};

/// Result of restarted k-means++ / Lloyd clustering.
struct KMeansResult {
    std::vector<double> centroids;  // k x dim
    std::vector<int> assignment;    // one cluster index per point
    double inertia = 0.0;
    /// Inertia after every assignment step, one trace per restart.
    std::vector<std::vector<double>> inertia_traces;
};

/// Clusters `n` points of dimension `dim` (row-major in `points`) into `k`
/// clusters. Requires at least k distinct points. Ties in the nearest
/// centroid resolve to the lowest index; an emptied cluster is reseeded with
/// the point farthest from its current centroid. The lowest-inertia restart
/// wins, earliest on ties.
KMeansResult kmeans(std::span<const double> points, std::size_t n, std::size_t dim, int k, std::uint64_t seed,
                    const KMeansOptions& options = {});

double inertia_of(std::span<const double> points, std::size_t dim, std::span<const int> assignment,
                  std::span<const double> centroids);

/// An object reduced to L component series plus the pixel-to-component map.
///
/// When the object has fewer than L distinct pixels only `effective_k`
/// clusters exist; slots l >= effective_k repeat slot l % effective_k so the
/// list always holds exactly L entries.
struct ComponentSet {
    std::string object_id;
    std::int64_t length = 0;  // T
    std::int64_t bands = 0;   // B
    int slots = 0;            // L
    int effective_k = 0;
    std::vector<float> centroids;  // L x T x B
    std::vector<int> assignment;   // one entry per pixel, < effective_k

    std::span<const float> centroid(int l) const {
        const auto stride = static_cast<std::size_t>(length * bands);
        return std::span<const float>(centroids).subspan(static_cast<std::size_t>(l) * stride, stride);
    }
    bool is_padding(int l) const { return l >= effective_k; }
    /// The real component a (possibly padded) slot stands for.
    int source_of(int l) const { return l % effective_k; }
};

ComponentSet extract_components(const SitsObject& obj, int slots, std::uint64_t seed, const KMeansOptions& options = {});

/// Per-object extraction, parallel over objects, seeds keyed by object id.
/// Results come back in input order and do not depend on the worker count.
std::vector<ComponentSet> extract_all(const Dataset& ds, int slots, std::uint64_t seed,
                                      const KMeansOptions& options = {});

/// Component cache: a header line followed by one ComponentSet per line.
struct ComponentCacheHeader {
    int slots = 0;
    std::uint64_t seed = 0;
    std::int64_t length = 0;
    std::int64_t bands = 0;
    KMeansOptions options;
    std::string norm_digest;  // identifies the normalization the clustering ran on
};

void save_components(const std::filesystem::path& path, const ComponentCacheHeader& header,
                     std::span<const ComponentSet> sets);
std::vector<ComponentSet> load_components(const std::filesystem::path& path, ComponentCacheHeader* header = nullptr);

/// Conventional cache file name next to a dataset: <dataset>.components.L<k>.ndjson
std::filesystem::path component_cache_path(const std::filesystem::path& dataset, int slots);

}  // namespace tassel
