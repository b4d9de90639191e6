#include "tassel/components.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"
#include "tassel/error.hpp"
#include "tassel/io_util.hpp"
#include "tassel/parallel.hpp"
#include "tassel/rng.hpp"

namespace tassel {

using nlohmann::json;

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct LloydState {
    std::span<const double> points;
    std::size_t n;
    std::size_t dim;
    int k;
    std::vector<double> centroids;
    std::vector<int> assignment;

    const double* point(std::size_t i) const { return points.data() + i * dim; }
    const double* centroid(int j) const { return centroids.data() + static_cast<std::size_t>(j) * dim; }

    double assign() {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(point(i), centroid(0), dim);
            for (int j = 1; j < k; ++j) {
                const double d = sq_dist(point(i), centroid(j), dim);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            assignment[i] = best;
            total += best_d;
        }
        return total;
    }

    // Moves the farthest point of a multi-member cluster into each empty
    // cluster. Never raises the cost of the current assignment.
    void reseed_empty() {
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
        std::vector<double> dist(n);
        for (std::size_t i = 0; i < n; ++i) dist[i] = sq_dist(point(i), centroid(assignment[i]), dim);
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] != 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assignment[i])] < 2) continue;
                if (far == n || dist[i] > dist[far]) far = i;
            }
            if (far == n) throw InternalError("k-means cannot fill an empty cluster");
            --counts[static_cast<std::size_t>(assignment[far])];
            assignment[far] = j;
            counts[static_cast<std::size_t>(j)] = 1;
            dist[far] = 0.0;
        }
    }

    /// Recomputes centroids as cluster means; returns the largest shift.
    double update() {
        reseed_empty();
        std::vector<double> next(static_cast<std::size_t>(k) * dim, 0.0);
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = static_cast<std::size_t>(assignment[i]);
            ++counts[a];
            for (std::size_t d = 0; d < dim; ++d) next[a * dim + d] += point(i)[d];
        }
        double shift = 0.0;
        for (int j = 0; j < k; ++j) {
            const auto base = static_cast<std::size_t>(j) * dim;
            for (std::size_t d = 0; d < dim; ++d) next[base + d] /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
            shift = std::max(shift, std::sqrt(sq_dist(next.data() + base, centroids.data() + base, dim)));
        }
        centroids = std::move(next);
        return shift;
    }
};

std::vector<double> kmeanspp_init(std::span<const double> points, std::size_t n, std::size_t dim, int k, Rng& rng) {
    std::vector<double> centroids;
    centroids.reserve(static_cast<std::size_t>(k) * dim);
    const auto first = static_cast<std::size_t>(rng.below(n));
    centroids.insert(centroids.end(), points.begin() + first * dim, points.begin() + (first + 1) * dim);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points.data() + i * dim, centroids.data(), dim);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                pick = i;
                r -= d2[i];
                if (r < 0.0) break;
            }
        } else {
            pick = static_cast<std::size_t>(rng.below(n));
        }
        const double* chosen = points.data() + pick * dim;
        centroids.insert(centroids.end(), chosen, chosen + dim);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points.data() + i * dim, chosen, dim));
    }
    return centroids;
}

}  // namespace

double inertia_of(std::span<const double> points, std::size_t dim, std::span<const int> assignment,
                  std::span<const double> centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        total += sq_dist(points.data() + i * dim, centroids.data() + static_cast<std::size_t>(assignment[i]) * dim, dim);
    return total;
}

KMeansResult kmeans(std::span<const double> points, std::size_t n, std::size_t dim, int k, std::uint64_t seed,
                    const KMeansOptions& options) {
    if (k < 1) throw ConfigError("k-means needs k >= 1");
    if (n < static_cast<std::size_t>(k)) throw ContractError("k-means needs at least k points");
    if (points.size() != n * dim) throw ShapeError("k-means point buffer does not match n x dim");
    if (options.restarts < 1 || options.max_iters < 1) throw ConfigError("k-means needs restarts >= 1 and max_iters >= 1");

    Rng rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> traces;
    for (int run = 0; run < options.restarts; ++run) {
        LloydState st{points, n, dim, k, kmeanspp_init(points, n, dim, k, rng), std::vector<int>(n, 0)};
        std::vector<double> trace;
        for (int it = 0; it < options.max_iters; ++it) {
            trace.push_back(st.assign());
            if (st.update() < options.tol) break;
        }
        trace.push_back(st.assign());
        st.update();
        const double final_inertia = inertia_of(points, dim, st.assignment, st.centroids);
        trace.push_back(final_inertia);
#ifndef NDEBUG
        for (std::size_t i = 1; i < trace.size(); ++i) assert(trace[i] <= trace[i - 1] * (1 + 1e-12) + 1e-12);
#endif
        traces.push_back(std::move(trace));
        if (final_inertia < best.inertia) {
            best.inertia = final_inertia;
            best.centroids = st.centroids;
            best.assignment = st.assignment;
        }
    }
    best.inertia_traces = std::move(traces);
    return best;
}

ComponentSet extract_components(const SitsObject& obj, int slots, std::uint64_t seed, const KMeansOptions& options) {
    if (slots < 1) throw ConfigError("number of components L must be >= 1, got " + std::to_string(slots));
    const std::size_t n = obj.pixel_count();
    if (n == 0) throw ContractError("object '" + obj.id + "' has no pixels");
    const auto dim = static_cast<std::size_t>(obj.pixel_size());

    ComponentSet out;
    out.object_id = obj.id;
    out.length = obj.length;
    out.bands = obj.bands;
    out.slots = slots;
    out.assignment.assign(n, 0);

    // Distinct pixel vectors, in order of first appearance.
    std::map<std::vector<float>, int> distinct;
    std::vector<std::size_t> representative;
    for (std::size_t p = 0; p < n; ++p) {
        auto px = obj.pixel(p);
        auto [it, inserted] = distinct.try_emplace(std::vector<float>(px.begin(), px.end()), static_cast<int>(representative.size()));
        if (inserted) representative.push_back(p);
        out.assignment[p] = it->second;
        if (distinct.size() > static_cast<std::size_t>(slots)) break;
    }

    std::vector<float> real_centroids;
    if (distinct.size() <= static_cast<std::size_t>(slots)) {
        out.effective_k = static_cast<int>(representative.size());
        for (auto p : representative) {
            auto px = obj.pixel(p);
            real_centroids.insert(real_centroids.end(), px.begin(), px.end());
        }
    } else {
        std::vector<double> points(obj.values.begin(), obj.values.end());
        auto res = kmeans(points, n, dim, slots, seed, options);
        out.effective_k = slots;
        out.assignment = std::move(res.assignment);
        real_centroids.assign(res.centroids.begin(), res.centroids.end());
    }

    out.centroids.reserve(static_cast<std::size_t>(slots) * dim);
    for (int l = 0; l < slots; ++l) {
        const auto src = static_cast<std::size_t>(l % out.effective_k) * dim;
        out.centroids.insert(out.centroids.end(), real_centroids.begin() + static_cast<std::ptrdiff_t>(src),
                             real_centroids.begin() + static_cast<std::ptrdiff_t>(src + dim));
    }
    return out;
}

std::vector<ComponentSet> extract_all(const Dataset& ds, int slots, std::uint64_t seed, const KMeansOptions& options) {
    std::vector<ComponentSet> out(ds.objects.size());
    parallel_for(ds.objects.size(), [&](std::size_t i) {
        const auto& obj = ds.objects[i];
        try {
            out[i] = extract_components(obj, slots, derive_seed(seed, "kmeans:" + obj.id), options);
        } catch (const Error& e) {
            throw Error(e.kind(), "object '" + obj.id + "': " + e.what());
        }
    });
    return out;
}

std::filesystem::path component_cache_path(const std::filesystem::path& dataset, int slots) {
    return dataset.string() + ".components.L" + std::to_string(slots) + ".ndjson";
}

void save_components(const std::filesystem::path& path, const ComponentCacheHeader& header,
                     std::span<const ComponentSet> sets) {
    std::string text;
    json h = {{"type", "components"},
              {"L", header.slots},
              {"seed", header.seed},
              {"T", header.length},
              {"B", header.bands},
              {"restarts", header.options.restarts},
              {"max_iters", header.options.max_iters},
              {"tol", header.options.tol},
              {"norm_digest", header.norm_digest}};
    text += h.dump() + "\n";
    for (const auto& cs : sets) {
        text += R"({"id":)" + json(cs.object_id).dump() + R"(,"effective_k":)" + std::to_string(cs.effective_k) +
                R"(,"centroids":[)";
        for (int l = 0; l < cs.slots; ++l) {
            if (l) text += ',';
            text += '[';
            auto c = cs.centroid(l);
            for (std::size_t i = 0; i < c.size(); ++i) {
                if (i) text += ',';
                text += format_float(c[i]);
            }
            text += ']';
        }
        text += R"(],"assignment":[)";
        for (std::size_t i = 0; i < cs.assignment.size(); ++i) {
            if (i) text += ',';
            text += std::to_string(cs.assignment[i]);
        }
        text += "]}\n";
    }
    write_file(path, text);
}

std::vector<ComponentSet> load_components(const std::filesystem::path& path, ComponentCacheHeader* header_out) {
    LineReader reader(path);
    std::string line;
    std::size_t lineno = 0;
    ComponentCacheHeader header;
    bool have_header = false;
    std::vector<ComponentSet> out;
    while (reader.next(line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            if (!have_header) {
                if (rec.value("type", "") != "components") throw SchemaError("component cache lacks its header");
                header.slots = rec.at("L").get<int>();
                header.seed = rec.at("seed").get<std::uint64_t>();
                header.length = rec.at("T").get<std::int64_t>();
                header.bands = rec.at("B").get<std::int64_t>();
                header.options.restarts = rec.at("restarts").get<int>();
                header.options.max_iters = rec.at("max_iters").get<int>();
                header.options.tol = rec.at("tol").get<double>();
                header.norm_digest = rec.at("norm_digest").get<std::string>();
                have_header = true;
                continue;
            }
            ComponentSet cs;
            cs.object_id = rec.at("id").get<std::string>();
            cs.length = header.length;
            cs.bands = header.bands;
            cs.slots = header.slots;
            cs.effective_k = rec.at("effective_k").get<int>();
            const auto& cents = rec.at("centroids");
            if (static_cast<int>(cents.size()) != header.slots)
                throw SchemaError("object '" + cs.object_id + "' lists " + std::to_string(cents.size()) + " centroids");
            for (const auto& c : cents) {
                if (static_cast<std::int64_t>(c.size()) != header.length * header.bands)
                    throw SchemaError("object '" + cs.object_id + "' has a centroid of the wrong length");
                for (const auto& v : c) cs.centroids.push_back(static_cast<float>(v.get<double>()));
            }
            cs.assignment = rec.at("assignment").get<std::vector<int>>();
            if (cs.effective_k < 1 || cs.effective_k > cs.slots)
                throw SchemaError("object '" + cs.object_id + "' has invalid effective_k");
            for (int a : cs.assignment)
                if (a < 0 || a >= cs.effective_k)
                    throw SchemaError("object '" + cs.object_id + "' assigns a pixel outside [0, effective_k)");
            out.push_back(std::move(cs));
        } catch (const json::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!have_header) throw SchemaError("component cache " + path.string() + " is empty");
    if (header_out) *header_out = header;
    return out;
}

}  // namespace tassel
