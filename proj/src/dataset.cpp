#include "tassel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tassel/error.hpp"
#include "tassel/io_util.hpp"
#include "tassel/rng.hpp"

namespace tassel {

using nlohmann::json;

std::string format_float(float v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw InternalError("float formatting failed");
    return std::string(buf, end);
}

void Dataset::validate() const {
    if (length < 1 || bands < 1) throw SchemaError("dataset requires T >= 1 and B >= 1");
    std::set<std::string> ids;
    for (const auto& obj : objects) {
        if (obj.length != length || obj.bands != bands)
            throw SchemaError("object '" + obj.id + "' has shape T=" + std::to_string(obj.length) +
                              ", B=" + std::to_string(obj.bands) + " but the dataset declares T=" +
                              std::to_string(length) + ", B=" + std::to_string(bands));
        if (!ids.insert(obj.id).second) throw SchemaError("duplicate object id '" + obj.id + "'");
        const auto stride = static_cast<std::size_t>(length * bands);
        if (obj.values.empty() || obj.values.size() % stride != 0)
            throw SchemaError("object '" + obj.id + "' must hold a positive number of T x B pixels");
        for (float v : obj.values)
            if (!std::isfinite(v)) throw SchemaError("object '" + obj.id + "' contains a non-finite value");
        if (obj.label && (*obj.label < 0 || *obj.label >= static_cast<int>(class_names.size())))
            throw SchemaError("object '" + obj.id + "' label " + std::to_string(*obj.label) + " outside [0, " +
                              std::to_string(class_names.size()) + ")");
        if (!obj.coords.empty()) {
            if (obj.coords.size() != obj.pixel_count())
                throw SchemaError("object '" + obj.id + "' has coords for some but not all pixels");
            std::set<GridCoord> seen(obj.coords.begin(), obj.coords.end());
            if (seen.size() != obj.coords.size())
                throw SchemaError("object '" + obj.id + "' has duplicate pixel coordinates");
        }
    }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.length = length;
    out.bands = bands;
    out.class_names = class_names;
    out.objects.reserve(indices.size());
    for (auto i : indices) out.objects.push_back(objects.at(i));
    return out;
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(objects.size());
    for (const auto& o : objects) {
        if (!o.label) throw ContractError("object '" + o.id + "' has no label");
        out.push_back(*o.label);
    }
    return out;
}

namespace {

void parse_header(const json& rec, Dataset& ds) {
    if (!rec.contains("T") || !rec.contains("B") || !rec.contains("class_names"))
        throw SchemaError("header record needs T, B and class_names");
    ds.length = rec.at("T").get<std::int64_t>();
    ds.bands = rec.at("B").get<std::int64_t>();
    if (ds.length < 1 || ds.bands < 1) throw SchemaError("header requires T >= 1 and B >= 1");
    ds.class_names = rec.at("class_names").get<std::vector<std::string>>();
}

SitsObject parse_object(const json& rec, const Dataset& ds) {
    SitsObject obj;
    obj.id = rec.at("id").get<std::string>();
    obj.length = ds.length;
    obj.bands = ds.bands;
    const auto& label = rec.at("label");
    if (!label.is_null()) {
        if (!label.is_number_integer()) throw SchemaError("object '" + obj.id + "': label must be an integer or null");
        const auto l = label.get<std::int64_t>();
        if (l < 0 || l >= static_cast<std::int64_t>(ds.class_names.size()))
            throw SchemaError("object '" + obj.id + "': label " + std::to_string(l) + " outside [0, " +
                              std::to_string(ds.class_names.size()) + ")");
        obj.label = static_cast<int>(l);
    }
    const auto& pixels = rec.at("pixels");
    if (!pixels.is_array() || pixels.empty()) throw SchemaError("object '" + obj.id + "': pixels must be a non-empty array");
    obj.values.reserve(pixels.size() * static_cast<std::size_t>(ds.length * ds.bands));
    for (const auto& px : pixels) {
        if (!px.is_array() || static_cast<std::int64_t>(px.size()) != ds.length)
            throw SchemaError("object '" + obj.id + "': every pixel needs exactly T=" + std::to_string(ds.length) +
                              " timestamps");
        for (const auto& frame : px) {
            if (!frame.is_array() || static_cast<std::int64_t>(frame.size()) != ds.bands)
                throw SchemaError("object '" + obj.id + "': every timestamp needs exactly B=" +
                                  std::to_string(ds.bands) + " values");
            for (const auto& v : frame) {
                if (!v.is_number()) throw SchemaError("object '" + obj.id + "': non-numeric pixel value");
                obj.values.push_back(static_cast<float>(v.get<double>()));
            }
        }
    }
    if (rec.contains("coords") && !rec.at("coords").is_null()) {
        const auto& coords = rec.at("coords");
        if (!coords.is_array() || coords.size() != pixels.size())
            throw SchemaError("object '" + obj.id + "': coords must list one [row, col] per pixel");
        for (const auto& c : coords) {
            if (!c.is_array() || c.size() != 2) throw SchemaError("object '" + obj.id + "': coord must be [row, col]");
            obj.coords.push_back({c[0].get<std::int32_t>(), c[1].get<std::int32_t>()});
        }
    }
    return obj;
}

template <typename NextLine>
Dataset read_records(NextLine&& next_line) {
    Dataset ds;
    bool have_header = false;
    std::string line;
    std::size_t lineno = 0;
    while (next_line(line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, e.what());
        }
        try {
            if (!rec.is_object() || !rec.contains("type")) throw SchemaError("record without a type field");
            const auto type = rec.at("type").get<std::string>();
            if (type == "header") {
                if (have_header) throw SchemaError("duplicate header record");
                parse_header(rec, ds);
                have_header = true;
            } else if (type == "object") {
                if (!have_header) throw SchemaError("object record before the header record");
                ds.objects.push_back(parse_object(rec, ds));
            } else {
                throw SchemaError("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw ParseError(lineno, e.what());
        } catch (const SchemaError& e) {
            std::string msg = e.what();
            msg.erase(0, msg.find(": ") + 2);
            throw SchemaError("line " + std::to_string(lineno) + ": " + msg);
        }
    }
    if (!have_header) throw SchemaError("dataset has no header record");
    ds.validate();
    return ds;
}

void write_object(std::string& out, const SitsObject& obj) {
    out += R"({"type":"object","id":)";
    out += json(obj.id).dump();
    out += R"(,"label":)";
    out += obj.label ? std::to_string(*obj.label) : "null";
    out += R"(,"pixels":[)";
    const auto p_count = obj.pixel_count();
    for (std::size_t p = 0; p < p_count; ++p) {
        if (p) out += ',';
        out += '[';
        auto px = obj.pixel(p);
        for (std::int64_t t = 0; t < obj.length; ++t) {
            if (t) out += ',';
            out += '[';
            for (std::int64_t b = 0; b < obj.bands; ++b) {
                if (b) out += ',';
                out += format_float(px[static_cast<std::size_t>(t * obj.bands + b)]);
            }
            out += ']';
        }
        out += ']';
    }
    out += R"(],"coords":)";
    if (obj.coords.empty()) {
        out += "null";
    } else {
        out += '[';
        for (std::size_t i = 0; i < obj.coords.size(); ++i) {
            if (i) out += ',';
            out += '[' + std::to_string(obj.coords[i].row) + ',' + std::to_string(obj.coords[i].col) + ']';
        }
        out += ']';
    }
    out += "}\n";
}

}  // namespace

Dataset read_ndjson(std::istream& in) {
    return read_records([&](std::string& line) {
        if (!std::getline(in, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    });
}

Dataset load_ndjson(const std::filesystem::path& path) {
    LineReader reader(path);
    return read_records([&](std::string& line) { return reader.next(line); });
}

std::string to_ndjson(const Dataset& ds) {
    std::string out;
    json header = {{"type", "header"}, {"T", ds.length}, {"B", ds.bands}, {"class_names", ds.class_names}};
    out += header.dump();
    out += '\n';
    for (const auto& obj : ds.objects) write_object(out, obj);
    return out;
}

void write_ndjson(const Dataset& ds, std::ostream& out) { out << to_ndjson(ds); }

void save_ndjson(const Dataset& ds, const std::filesystem::path& path) { write_file(path, to_ndjson(ds)); }

NormStats fit_normalizer(const Dataset& train) {
    if (train.objects.empty()) throw ContractError("cannot fit a normalizer on an empty training set");
    const auto bands = static_cast<std::size_t>(train.bands);
    NormStats stats;
    stats.min.assign(bands, std::numeric_limits<double>::infinity());
    stats.max.assign(bands, -std::numeric_limits<double>::infinity());
    for (const auto& obj : train.objects)
        for (std::size_t i = 0; i < obj.values.size(); ++i) {
            const auto b = i % bands;
            stats.min[b] = std::min<double>(stats.min[b], obj.values[i]);
            stats.max[b] = std::max<double>(stats.max[b], obj.values[i]);
        }
    for (std::size_t b = 0; b < bands; ++b)
        if (stats.degenerate(b))
            warn("band " + std::to_string(b) + " is constant over the training set; it maps to 0 everywhere");
    return stats;
}

Dataset apply_normalizer(const Dataset& ds, const NormStats& stats) {
    if (stats.bands() != static_cast<std::size_t>(ds.bands))
        throw SchemaError("normalizer has " + std::to_string(stats.bands()) + " bands, dataset has " +
                          std::to_string(ds.bands));
    Dataset out = ds;
    const auto bands = stats.bands();
    for (auto& obj : out.objects)
        for (std::size_t i = 0; i < obj.values.size(); ++i) {
            const auto b = i % bands;
            if (stats.degenerate(b)) {
                obj.values[i] = 0.0f;
                continue;
            }
            const double v = (obj.values[i] - stats.min[b]) / (stats.max[b] - stats.min[b]);
            obj.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    return out;
}

SplitIndices split_indices(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
    const double total = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    for (double f : fractions)
        if (f < 0.0) throw ConfigError("split fractions must be non-negative");

    // Strata keyed by label; unlabeled objects form their own stratum (-1).
    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < ds.objects.size(); ++i) strata[ds.objects[i].label.value_or(-1)].push_back(i);

    Rng rng(derive_seed(seed, "split"));
    SplitIndices out;
    for (auto& [label, members] : strata) {
        if (members.size() < 3) {
            warn("class " + std::to_string(label) + " has only " + std::to_string(members.size()) +
                 " object(s); all go to the training split");
            out.train.insert(out.train.end(), members.begin(), members.end());
            continue;
        }
        rng.shuffle(std::span<std::size_t>(members));
        const double n = static_cast<double>(members.size());
        std::array<std::size_t, 3> counts{};
        std::array<double, 3> remainder{};
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double exact = fractions[s] * n;
            counts[s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
            remainder[s] = exact - static_cast<double>(counts[s]);
            assigned += counts[s];
        }
        // Largest remainder first; ties keep train, validation, test order.
        std::array<int, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
        for (std::size_t r = 0; assigned < members.size(); ++r, ++assigned) ++counts[order[r % 3]];

        auto it = members.begin();
        out.train.insert(out.train.end(), it, it + counts[0]);
        it += counts[0];
        out.validation.insert(out.validation.end(), it, it + counts[1]);
        it += counts[1];
        out.test.insert(out.test.end(), it, it + counts[2]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

DatasetSplit split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
    const auto idx = split_indices(ds, fractions, seed);
    return {ds.subset(idx.train), ds.subset(idx.validation), ds.subset(idx.test)};
}

}  // namespace tassel
