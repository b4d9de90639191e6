#include "tassel/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "tassel/io_util.hpp"

namespace tassel {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'A', 'S', 'S', 'E', 'L', 'C', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t& pos) {
    if (pos + sizeof(T) > bytes.size()) throw SchemaError("checkpoint is truncated");
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

json architecture_json(const ModelConfig& c) {
    return {{"T", c.length},
            {"B", c.bands},
            {"classes", c.classes},
            {"slots", c.slots},
            {"conv_filters", c.conv_filters},
            {"wide_filters", c.wide_filters},
            {"head_units", c.head_units},
            {"dropout", c.dropout},
            {"bn_eps", c.bn_eps},
            {"bn_momentum", c.bn_momentum}};
}

ModelConfig architecture_from(const json& j) {
    ModelConfig c;
    c.length = j.at("T").get<std::int64_t>();
    c.bands = j.at("B").get<std::int64_t>();
    c.classes = j.at("classes").get<int>();
    c.slots = j.at("slots").get<int>();
    c.conv_filters = j.at("conv_filters").get<int>();
    c.wide_filters = j.at("wide_filters").get<int>();
    c.head_units = j.at("head_units").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.bn_eps = j.at("bn_eps").get<double>();
    c.bn_momentum = j.at("bn_momentum").get<double>();
    return c;
}

}  // namespace

std::string serialize_checkpoint(const TrainedModel& m) {
    std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
    for (const auto& p : m.net.parameters()) tensors.emplace_back(p.name, &p.var.value());
    for (const auto& b : m.net.buffers()) tensors.emplace_back(b.name, b.tensor);

    json entries = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        entries.push_back({{"name", name}, {"shape", t->shape()}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(t->numel());
    }
    const json manifest = {
        {"format_version", kCheckpointVersion},
        {"architecture", architecture_json(m.config)},
        {"class_names", m.class_names},
        {"norm_stats", {{"min", m.norm.min}, {"max", m.norm.max}}},
        {"clustering",
         {{"slots", m.clustering.slots},
          {"seed", m.clustering.seed},
          {"restarts", m.clustering.options.restarts},
          {"max_iters", m.clustering.options.max_iters},
          {"tol", m.clustering.options.tol}}},
        {"tensors", entries},
        {"blob_floats", offset}};
    const std::string text = manifest.dump();

    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, text.size());
    out += text;
    for (const auto& [name, t] : tensors) {
        const auto data = t->data();
        out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
    }
    return out;
}

TrainedModel deserialize_checkpoint(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw SchemaError("not a TASSEL checkpoint (bad magic)");
    std::size_t pos = sizeof kMagic;
    const auto version = get<std::uint32_t>(bytes, pos);
    if (version != kCheckpointVersion)
        throw SchemaError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    const auto manifest_len = get<std::uint64_t>(bytes, pos);
    if (pos + manifest_len > bytes.size()) throw SchemaError("checkpoint is truncated");
    json manifest;
    try {
        manifest = json::parse(bytes.substr(pos, manifest_len));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
    }
    pos += manifest_len;

    try {
        if (manifest.at("format_version").get<std::uint32_t>() != version)
            throw SchemaError("checkpoint manifest version disagrees with its header");
        ModelConfig config = architecture_from(manifest.at("architecture"));
        ClusteringSpec clustering;
        const auto& cl = manifest.at("clustering");
        clustering.slots = cl.at("slots").get<int>();
        clustering.seed = cl.at("seed").get<std::uint64_t>();
        clustering.options.restarts = cl.at("restarts").get<int>();
        clustering.options.max_iters = cl.at("max_iters").get<int>();
        clustering.options.tol = cl.at("tol").get<double>();
        NormStats norm;
        norm.min = manifest.at("norm_stats").at("min").get<std::vector<double>>();
        norm.max = manifest.at("norm_stats").at("max").get<std::vector<double>>();
        if (norm.min.size() != static_cast<std::size_t>(config.bands) || norm.max.size() != norm.min.size())
            throw SchemaError("checkpoint normalization does not match its band count");

        TrainedModel m{config, manifest.at("class_names").get<std::vector<std::string>>(), std::move(norm), clustering,
                       TasselNet<float>(config, 0)};
        if (static_cast<int>(m.class_names.size()) != config.classes)
            throw SchemaError("checkpoint class names do not match its class count");

        std::vector<std::pair<std::string, Tensor<float>*>> targets;
        for (auto& p : m.net.parameters()) {
            Var<float> v = p.var;
            targets.emplace_back(p.name, &v.mutable_value());
        }
        for (auto& b : m.net.buffers()) targets.emplace_back(b.name, b.tensor);

        const auto& entries = manifest.at("tensors");
        if (entries.size() != targets.size())
            throw SchemaError("checkpoint declares " + std::to_string(entries.size()) + " tensors, architecture needs " +
                              std::to_string(targets.size()));
        const std::size_t blob = pos;
        const auto total = manifest.at("blob_floats").get<std::uint64_t>();
        if (bytes.size() - blob != total * sizeof(float)) throw SchemaError("checkpoint weight blob has the wrong size");
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto& e = entries[i];
            auto& [name, tensor] = targets[i];
            if (e.at("name").get<std::string>() != name)
                throw SchemaError("checkpoint tensor " + std::to_string(i) + " is '" + e.at("name").get<std::string>() +
                                  "', expected '" + name + "'");
            if (e.at("shape").get<Shape>() != tensor->shape())
                throw SchemaError("checkpoint tensor '" + name + "' has the wrong shape");
            const auto offset = e.at("offset").get<std::uint64_t>();
            const auto n = static_cast<std::uint64_t>(tensor->numel());
            if (offset + n > total) throw SchemaError("checkpoint tensor '" + name + "' lies outside the blob");
            std::memcpy(tensor->ptr(), bytes.data() + blob + offset * sizeof(float), n * sizeof(float));
            if (!tensor->all_finite()) throw NumericError("checkpoint tensor '" + name + "' holds non-finite values");
        }
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed checkpoint manifest: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model) {
    write_file(path, serialize_checkpoint(model));
}

TrainedModel load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace tassel
