#include "tassel/pipeline.hpp"

namespace tassel {

namespace {

std::vector<int> labels_of(const Dataset& ds) { return ds.labels(); }

}  // namespace

PreparedSplit prepare_split(const Dataset& raw, int slots, std::uint64_t seed, const KMeansOptions& options) {
    PreparedSplit s;
    s.indices = split_indices(raw, kDefaultSplit, seed);
    const Dataset train = raw.subset(s.indices.train);
    if (train.objects.empty()) throw ContractError("the training split is empty");
    s.norm = fit_normalizer(train);
    s.data.train = apply_normalizer(train, s.norm);
    s.data.validation = apply_normalizer(raw.subset(s.indices.validation), s.norm);
    s.data.test = apply_normalizer(raw.subset(s.indices.test), s.norm);
    s.train_labels = labels_of(s.data.train);
    s.validation_labels = labels_of(s.data.validation);
    s.test_labels = labels_of(s.data.test);
    s.clustering.seed = seed;
    recluster(s, slots, options);
    return s;
}

void recluster(PreparedSplit& s, int slots, const KMeansOptions& options) {
    s.clustering.slots = slots;
    s.clustering.options = options;
    s.train = extract_all(s.data.train, slots, s.clustering.seed, options);
    s.validation = extract_all(s.data.validation, slots, s.clustering.seed, options);
    s.test = extract_all(s.data.test, slots, s.clustering.seed, options);
}

std::vector<ComponentSet> components_for(const TrainedModel& model, const Dataset& raw) {
    if (raw.length != model.config.length || raw.bands != model.config.bands)
        throw ShapeError("dataset is " + std::to_string(raw.length) + "x" + std::to_string(raw.bands) +
                         " but the model expects " + std::to_string(model.config.length) + "x" +
                         std::to_string(model.config.bands));
    const Dataset normalized = apply_normalizer(raw, model.norm);
    return extract_all(normalized, model.clustering.slots, model.clustering.seed, model.clustering.options);
}

ModelConfig model_config(const TrainConfig& config, const Dataset& data) {
    ModelConfig m;
    m.length = data.length;
    m.bands = data.bands;
    m.classes = static_cast<int>(data.class_count());
    m.slots = config.n_components;
    m.conv_filters = config.conv_filters;
    m.wide_filters = config.wide_filters;
    m.head_units = config.head_units;
    m.dropout = config.dropout;
    return m;
}

TrainedModel train_tassel(const PreparedSplit& split, const TrainConfig& config, FitReport* report) {
    config.validate();
    if (split.clustering.slots != config.n_components)
        throw ConfigError("split was clustered with L=" + std::to_string(split.clustering.slots) +
                          " but training asks for n_components=" + std::to_string(config.n_components));
    const ModelConfig mc = model_config(config, split.data.train);
    TrainedModel model{mc, split.data.train.class_names, split.norm, split.clustering, TasselNet<float>(mc, config.seed)};
    FitReport fit_report = fit(model.net, std::span<const ComponentSet>(split.train), split.train_labels,
                               std::span<const ComponentSet>(split.validation), split.validation_labels, mc.classes,
                               config);
    if (report) *report = std::move(fit_report);
    return model;
}

Evaluation evaluate(const TasselNet<float>& net, std::span<const ComponentSet> sets, std::span<const int> labels,
                    int classes) {
    Evaluation e;
    e.predictions = net.predict(sets);
    std::vector<int> predicted;
    for (const auto& p : e.predictions) predicted.push_back(p.label);
    e.confusion = confusion(predicted, labels, classes);
    e.report = metrics(e.confusion);
    return e;
}

Evaluation run_baseline(const PreparedSplit& split, const TrainConfig& config, FitReport* report) {
    config.validate();
    const auto options = config.kmeans();
    const auto seed = split.clustering.seed;
    const auto train = extract_all(split.data.train, 1, seed, options);
    const auto val = extract_all(split.data.validation, 1, seed, options);
    const auto test = extract_all(split.data.test, 1, seed, options);
    MlpConfig mc;
    mc.length = split.data.train.length;
    mc.bands = split.data.train.bands;
    mc.classes = split.classes();
    mc.hidden_units = config.head_units;
    mc.dropout = config.dropout;
    BaselineMlp<float> mlp(mc, config.seed);
    FitReport fit_report = fit(mlp, std::span<const ComponentSet>(train), split.train_labels,
                               std::span<const ComponentSet>(val), split.validation_labels, mc.classes, config);
    if (report) *report = std::move(fit_report);
    Evaluation e;
    e.confusion = confusion(mlp.predict_labels(test), split.test_labels, mc.classes);
    e.report = metrics(e.confusion);
    return e;
}

}  // namespace tassel
