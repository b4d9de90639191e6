#include "tassel/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tassel/error.hpp"
#include "tassel/io_util.hpp"
#include "tassel/rng.hpp"

namespace tassel {

using nlohmann::json;

namespace {

constexpr double kAmplitude = 1.0;
constexpr double kStep = 0.6;
constexpr double kSoilLevel = 0.8;

double band_base(std::int64_t b) { return 1.5 + 0.5 * static_cast<double>(b % 2); }

double band_scale(std::int64_t b) {
    constexpr double scales[] = {1.0, 0.8, 1.2, 0.9};
    return scales[b % 4];
}

double trend(const SynthConfig& c, std::int64_t t, std::int64_t b) {
    const double span = c.length > 1 ? static_cast<double>(t) / static_cast<double>(c.length - 1) : 0.0;
    return 0.2 * static_cast<double>(b + 1) / static_cast<double>(c.bands) * span;
}

double seasonal(const SynthConfig& c, std::int64_t t, double phase) {
    return std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(c.length) + phase);
}

// Deviation of a shape from the band baseline, before amplitude jitter.
double class_shape(const SynthConfig& c, int cls, std::int64_t t, std::int64_t b) {
    const double phase = 2.0 * std::numbers::pi * cls / c.classes;
    return band_scale(b) * kAmplitude * seasonal(c, t, phase);
}

double distractor_shape(const SynthConfig& c, int j, std::int64_t t, std::int64_t b) {
    if (j < c.classes) {
        const double phase = 2.0 * std::numbers::pi * (j + 0.5) / c.classes;
        return band_scale(b) * kAmplitude * seasonal(c, t, phase);
    }
    if (j == c.classes) return kSoilLevel * band_scale(b);
    return (2 * t < c.length ? -kStep : kStep) * band_scale(b);
}

}  // namespace

void SynthConfig::validate() const {
    if (length < 1 || bands < 1) throw ConfigError("synthetic T and B must be >= 1");
    if (classes < 1) throw ConfigError("synthetic class count must be >= 1");
    if (objects_per_class < 1) throw ConfigError("objects per class must be >= 1");
    if (min_pixels < 1 || max_pixels < min_pixels) throw ConfigError("pixel range must satisfy 1 <= min <= max");
    if (!(distractor_fraction >= 0.0 && distractor_fraction < 1.0))
        throw ConfigError("distractor_fraction must lie in [0, 1)");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
}

json to_json(const SynthConfig& c) {
    return {{"T", c.length},
            {"B", c.bands},
            {"classes", c.classes},
            {"objects_per_class", c.objects_per_class},
            {"min_pixels", c.min_pixels},
            {"max_pixels", c.max_pixels},
            {"distractor_fraction", c.distractor_fraction},
            {"noise_sigma", c.noise_sigma},
            {"seed", c.seed},
            {"coords", c.coords}};
}

SynthConfig synth_config_from_json(const json& j, SynthConfig c) {
    if (!j.is_object()) throw ConfigError("synthetic configuration must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "T") c.length = v.get<std::int64_t>();
            else if (key == "B") c.bands = v.get<std::int64_t>();
            else if (key == "classes") c.classes = v.get<int>();
            else if (key == "objects_per_class") c.objects_per_class = v.get<int>();
            else if (key == "min_pixels") c.min_pixels = v.get<int>();
            else if (key == "max_pixels") c.max_pixels = v.get<int>();
            else if (key == "distractor_fraction") c.distractor_fraction = v.get<double>();
            else if (key == "noise_sigma") c.noise_sigma = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "coords") c.coords = v.get<bool>();
            else throw ConfigError("unknown synthetic option '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad synthetic option value: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const SynthTruth& truth) {
    json objects = json::array();
    for (const auto& o : truth.objects) {
        std::vector<int> disc, dist;
        for (std::size_t p = 0; p < o.discriminative.size(); ++p) (o.discriminative[p] ? disc : dist).push_back(static_cast<int>(p));
        objects.push_back({{"id", o.id},
                           {"label", o.label},
                           {"distractor_shape", o.distractor_shape},
                           {"pixels", o.discriminative.size()},
                           {"discriminative", disc},
                           {"distractor", dist}});
    }
    return {{"objects", objects}};
}

SynthTruth synth_truth_from_json(const json& j) {
    SynthTruth truth;
    try {
        for (const auto& o : j.at("objects")) {
            SynthObjectTruth t;
            t.id = o.at("id").get<std::string>();
            t.label = o.at("label").get<int>();
            t.distractor_shape = o.at("distractor_shape").get<int>();
            t.discriminative.assign(o.at("pixels").get<std::size_t>(), false);
            for (int p : o.at("discriminative").get<std::vector<int>>()) t.discriminative.at(static_cast<std::size_t>(p)) = true;
            truth.objects.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed synthetic truth: ") + e.what());
    } catch (const std::out_of_range&) {
        throw SchemaError("synthetic truth pixel index out of range");
    }
    return truth;
}

std::vector<double> class_prototype(const SynthConfig& c, int cls) {
    std::vector<double> out(static_cast<std::size_t>(c.length * c.bands));
    for (std::int64_t t = 0; t < c.length; ++t)
        for (std::int64_t b = 0; b < c.bands; ++b)
            out[static_cast<std::size_t>(t * c.bands + b)] = band_base(b) + trend(c, t, b) + class_shape(c, cls, t, b);
    return out;
}

std::vector<double> distractor_prototype(const SynthConfig& c, int j) {
    std::vector<double> out(static_cast<std::size_t>(c.length * c.bands));
    for (std::int64_t t = 0; t < c.length; ++t)
        for (std::int64_t b = 0; b < c.bands; ++b)
            out[static_cast<std::size_t>(t * c.bands + b)] = band_base(b) + trend(c, t, b) + distractor_shape(c, j, t, b);
    return out;
}

SynthData generate(const SynthConfig& c) {
    c.validate();
    SynthData out;
    Dataset& ds = out.dataset;
    ds.length = c.length;
    ds.bands = c.bands;
    for (int k = 0; k < c.classes; ++k) ds.class_names.push_back("class" + std::to_string(k));

    const auto per = static_cast<std::size_t>(c.length * c.bands);
    const int total = c.classes * c.objects_per_class;
    char id[32];
    for (int i = 0; i < total; ++i) {
        const int label = i % c.classes;
        Rng rng(derive_seed(c.seed, "synth", static_cast<std::uint64_t>(i)));
        const int pixels = c.min_pixels + static_cast<int>(rng.below(static_cast<std::uint64_t>(c.max_pixels - c.min_pixels + 1)));

        // Layout: the first `pixels` cells of a near-square grid, row-major.
        const int width = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pixels))));
        std::vector<GridCoord> coords;
        for (int p = 0; p < pixels; ++p) coords.push_back({p / width, p % width});

        int n_dist = 0;
        if (c.distractor_fraction > 0.0 && pixels > 1) {
            const double f = std::clamp(c.distractor_fraction * rng.uniform(0.7, 1.3), 0.0, 1.0);
            n_dist = std::clamp(static_cast<int>(std::lround(f * pixels)), 1, pixels - 1);
        }
        const int shape = n_dist > 0 ? static_cast<int>(rng.below(static_cast<std::uint64_t>(c.distractor_pool_size()))) : -1;

        // The distractor region is the band of pixels nearest one randomly chosen side.
        const int side = static_cast<int>(rng.below(4));
        std::vector<int> order(static_cast<std::size_t>(pixels));
        std::iota(order.begin(), order.end(), 0);
        auto key = [&](int p) {
            const auto& g = coords[static_cast<std::size_t>(p)];
            switch (side) {
                case 0: return g.row;
                case 1: return -g.row;
                case 2: return g.col;
                default: return -g.col;
            }
        };
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
        std::vector<bool> discriminative(static_cast<std::size_t>(pixels), true);
        for (int r = 0; r < n_dist; ++r) discriminative[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = false;

        const double class_gain = rng.uniform(0.9, 1.1);
        const double dist_gain = rng.uniform(0.6, 1.4);

        SitsObject obj;
        std::snprintf(id, sizeof id, "obj%05d", i);
        obj.id = id;
        obj.label = label;
        obj.length = c.length;
        obj.bands = c.bands;
        obj.values.resize(per * static_cast<std::size_t>(pixels));
        for (int p = 0; p < pixels; ++p) {
            const bool disc = discriminative[static_cast<std::size_t>(p)];
            for (std::int64_t t = 0; t < c.length; ++t) {
                for (std::int64_t b = 0; b < c.bands; ++b) {
                    const double base = band_base(b) + trend(c, t, b);
                    const double dev = disc ? class_gain * class_shape(c, label, t, b)
                                            : dist_gain * distractor_shape(c, shape, t, b);
                    const double noise = c.noise_sigma > 0.0 ? c.noise_sigma * rng.normal() : 0.0;
                    obj.values[static_cast<std::size_t>(p) * per + static_cast<std::size_t>(t * c.bands + b)] =
                        static_cast<float>(base + dev + noise);
                }
            }
        }
        if (c.coords) obj.coords = coords;
        ds.objects.push_back(std::move(obj));
        out.truth.objects.push_back({ds.objects.back().id, label, shape, std::move(discriminative)});
    }
    ds.validate();
    return out;
}

std::filesystem::path truth_path(const std::filesystem::path& dataset) {
    std::string name = dataset.filename().string();
    for (const char* ext : {".gz", ".ndjson", ".jsonl"})
        if (name.size() > std::strlen(ext) && name.ends_with(ext)) name.resize(name.size() - std::strlen(ext));
    return dataset.parent_path() / (name + ".truth.json");
}

void save_synth(const std::filesystem::path& path, const SynthData& data) {
    save_ndjson(data.dataset, path);
    write_file(truth_path(path), to_json(data.truth).dump(1) + "\n");
}

}  // namespace tassel
