// tassel: command line front end for the synthetic generator, clustering,
// training, evaluation, prediction and attention-map export.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tassel/error.hpp"
#include "tassel/explain.hpp"
#include "tassel/io_util.hpp"
#include "tassel/parallel.hpp"
#include "tassel/pipeline.hpp"
#include "tassel/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tassel;

namespace {

/// Collects what a run read and wrote; written last as manifest.json.
struct Manifest {
    std::string command;
    json config = json::object();
    std::vector<std::uint64_t> seeds;
    json inputs = json::array();
    std::vector<std::string> outputs;
    fs::path dir;

    void input(const fs::path& p) { inputs.push_back({{"path", p.string()}, {"fnv1a64", file_digest(p)}}); }

    void write(const std::string& name, std::string_view text) {
        write_file(dir / name, text);
        outputs.push_back(name);
    }

    void finish() {
        json j{{"command", command},
               {"tool_version", TASSEL_VERSION},
               {"config", config},
               {"seeds", seeds},
               {"inputs", inputs},
               {"outputs", outputs}};
        write_file(dir / "manifest.json", j.dump(2) + "\n");
    }
};

Manifest start_run(const std::string& command, const fs::path& out) {
    fs::create_directories(out);
    Manifest m;
    m.command = command;
    m.dir = out;
    return m;
}

/// "0..4", "0,2,5" or a single value.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    try {
        if (const auto dots = text.find(".."); dots != std::string::npos) {
            const auto lo = std::stoull(text.substr(0, dots));
            const auto hi = std::stoull(text.substr(dots + 2));
            if (hi < lo) throw ConfigError("empty seed range '" + text + "'");
            for (auto s = lo; s <= hi; ++s) out.push_back(s);
        } else {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
        }
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse seeds '" + text + "'");
    }
    if (out.empty()) throw ConfigError("no seeds given");
    return out;
}

// Training flags. Each one is named after its TrainConfig field; flags given
// on the command line override the --config file.
struct TrainFlags {
    std::string config_file;
    std::map<std::string, CLI::Option*> options;
    TrainConfig values;

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "JSON file with training options")->check(CLI::ExistingFile);
        auto& v = values;
        options["epochs"] = app->add_option("--epochs", v.epochs);
        options["batch_size"] = app->add_option("--batch_size,--batch-size", v.batch_size);
        options["lr"] = app->add_option("--lr", v.lr);
        options["lambda"] = app->add_option("--lambda", v.lambda, "auxiliary loss weight; 0 disables the auxiliary head");
        options["n_components"] = app->add_option("--n_components,--n-components,--nc", v.n_components);
        options["seed"] = app->add_option("--seed", v.seed, "split, clustering and initialization seed");
        options["eval_every"] = app->add_option("--eval_every,--eval-every", v.eval_every);
        options["report_every"] = app->add_option("--report_every,--report-every", v.report_every);
        options["beta1"] = app->add_option("--beta1", v.beta1);
        options["beta2"] = app->add_option("--beta2", v.beta2);
        options["adam_eps"] = app->add_option("--adam_eps,--adam-eps", v.adam_eps);
        options["dropout"] = app->add_option("--dropout", v.dropout);
        options["conv_filters"] = app->add_option("--conv_filters,--conv-filters", v.conv_filters);
        options["wide_filters"] = app->add_option("--wide_filters,--wide-filters", v.wide_filters);
        options["head_units"] = app->add_option("--head_units,--head-units", v.head_units);
        options["kmeans_restarts"] = app->add_option("--kmeans_restarts,--kmeans-restarts", v.kmeans_restarts);
        options["kmeans_max_iters"] = app->add_option("--kmeans_max_iters,--kmeans-max-iters", v.kmeans_max_iters);
        options["kmeans_tol"] = app->add_option("--kmeans_tol,--kmeans-tol", v.kmeans_tol);
    }

    TrainConfig resolve() const {
        TrainConfig base;
        if (!config_file.empty()) {
            json file;
            try {
                file = json::parse(read_file(config_file));
            } catch (const json::exception& e) {
                throw ConfigError("cannot parse " + config_file + ": " + e.what());
            }
            base = train_config_from_json(file, base);
        }
        const json all = to_json(values);
        json overrides = json::object();
        for (const auto& [name, opt] : options)
            if (opt->count() > 0) overrides[name] = all.at(name);
        return train_config_from_json(overrides, base);
    }
};

Dataset load_dataset(Manifest& m, const fs::path& path) {
    auto ds = load_ndjson(path);
    m.input(path);
    return ds;
}

TrainedModel load_model(Manifest& m, const fs::path& path) {
    auto model = load_checkpoint(path);
    m.input(path);
    return model;
}

std::string norm_digest(const NormStats& n) {
    json j{{"min", n.min}, {"max", n.max}};
    return hex64(fnv1a64(j.dump()));
}

json prediction_json(const PredictionRecord& p, const std::vector<std::string>& names) {
    return {{"object_id", p.object_id},
            {"label", p.label},
            {"class_name", names.at(static_cast<std::size_t>(p.label))},
            {"scores", p.scores},
            {"alpha", p.component_alpha}};
}

void print_metrics(const std::string& title, const MetricReport& r) {
    std::printf("%s: accuracy %.4f  kappa %.4f  weighted F1 %.4f  macro F1 %.4f\n", title.c_str(), r.accuracy, r.kappa,
                r.weighted_f1, r.macro_f1);
}

// ---- subcommands --------------------------------------------------------

struct SynthArgs {
    std::string config_file;
    SynthConfig config;
    std::string out;
};

void cmd_synth(const SynthArgs& a, CLI::App& app) {
    SynthConfig c;
    if (!a.config_file.empty()) c = synth_config_from_json(json::parse(read_file(a.config_file)), c);
    json overrides = json::object();
    const json all = to_json(a.config);
    const std::pair<const char*, const char*> flags[] = {
        {"length", "T"},          {"bands", "B"},           {"classes", "classes"},
        {"objects_per_class", "objects_per_class"},         {"min_pixels", "min_pixels"},
        {"max_pixels", "max_pixels"},                       {"distractor_fraction", "distractor_fraction"},
        {"noise_sigma", "noise_sigma"},                     {"seed", "seed"}};
    for (const auto& [flag, key] : flags)
        if (app.count(std::string("--") + flag) > 0) overrides[key] = all.at(key);
    c = synth_config_from_json(overrides, c);

    auto m = start_run("synth", a.out);
    m.config = to_json(c);
    m.seeds = {c.seed};
    const auto data = generate(c);
    save_synth(fs::path(a.out) / "synth.ndjson", data);
    m.outputs = {"synth.ndjson", truth_path("synth.ndjson").string()};
    m.finish();
    std::printf("wrote %zu objects (%d classes, T=%lld, B=%lld) to %s\n", data.dataset.size(), c.classes, static_cast<long long>(c.length),
                static_cast<long long>(c.bands), (fs::path(a.out) / "synth.ndjson").c_str());
}

struct ClusterArgs {
    std::string data, out;
    int nc = 6;
    std::uint64_t seed = 0;
    KMeansOptions options;
};

void cmd_cluster(const ClusterArgs& a) {
    auto m = start_run("cluster", a.out);
    const auto raw = load_dataset(m, a.data);
    m.config = {{"n_components", a.nc},
                {"kmeans_restarts", a.options.restarts},
                {"kmeans_max_iters", a.options.max_iters},
                {"kmeans_tol", a.options.tol}};
    m.seeds = {a.seed};
    // normalization and clustering exactly as `train --seed` does it
    const auto split = prepare_split(raw, a.nc, a.seed, a.options);
    ComponentCacheHeader header{a.nc, a.seed, raw.length, raw.bands, a.options, norm_digest(split.norm)};
    std::vector<ComponentSet> all;
    for (const auto* part : {&split.train, &split.validation, &split.test}) all.insert(all.end(), part->begin(), part->end());
    save_components(fs::path(a.out) / "components.ndjson", header, all);
    m.outputs.push_back("components.ndjson");
    json parts{{"train", json::array()}, {"validation", json::array()}, {"test", json::array()}};
    for (const auto& s : split.train) parts["train"].push_back(s.object_id);
    for (const auto& s : split.validation) parts["validation"].push_back(s.object_id);
    for (const auto& s : split.test) parts["test"].push_back(s.object_id);
    m.write("split.json", parts.dump(2) + "\n");
    m.finish();
    std::size_t padded = 0;
    for (const auto& s : all) padded += s.effective_k < s.slots;
    std::printf("clustered %zu objects into L=%d components (%zu with padded slots)\n", all.size(), a.nc, padded);
}

struct TrainArgs {
    std::string data, out;
    TrainFlags flags;
};

void cmd_train(const TrainArgs& a) {
    auto m = start_run("train", a.out);
    const auto config = a.flags.resolve();
    m.config = to_json(config);
    m.seeds = {config.seed};
    std::fprintf(stderr, "resolved config: %s\n", m.config.dump().c_str());
    const auto raw = load_dataset(m, a.data);
    const auto split = prepare_split(raw, config.n_components, config.seed, config.kmeans());
    FitReport fit_report;
    const auto model = train_tassel(split, config, &fit_report);
    save_checkpoint(fs::path(a.out) / "model.ckpt", model);
    m.outputs.push_back("model.ckpt");
    m.write("fit.json", to_json(fit_report).dump(2) + "\n");
    m.write("fit_trace.csv", fit_trace_csv(fit_report));
    const auto ev = evaluate(model.net, split.test, split.test_labels, split.classes());
    json metrics_json = to_json(ev.report, model.class_names);
    metrics_json["confusion"] = to_json(ev.confusion);
    m.write("metrics.json", metrics_json.dump(2) + "\n");
    m.write("metrics.csv", metric_csv_header() + "\n" + metric_csv_row("seed" + std::to_string(config.seed), ev.report) + "\n");
    m.finish();
    std::printf("selected epoch %d (validation weighted F1 %.4f), %.1fs\n", fit_report.selected_epoch,
                fit_report.best_val_f1, fit_report.wall_seconds);
    print_metrics("test", ev.report);
}

struct EvalArgs {
    std::string data, model, predictions, out, seeds;
    bool baseline = false;
    TrainFlags flags;
};

void write_eval(Manifest& m, const ConfusionMatrix& cm, const std::vector<std::string>& names) {
    const auto report = metrics(cm);
    json j = to_json(report, names);
    j["confusion"] = to_json(cm);
    m.write("metrics.json", j.dump(2) + "\n");
    m.write("metrics.csv", metric_csv_header() + "\n" + metric_csv_row("eval", report) + "\n");
    print_metrics("eval", report);
}

std::vector<int> predictions_from_file(const fs::path& path, const Dataset& data) {
    std::map<std::string, int> by_id;
    LineReader reader(path);
    std::string line;
    std::size_t n = 0;
    while (reader.next(line)) {
        ++n;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            by_id[j.at("object_id").get<std::string>()] = j.at("label").get<int>();
        } catch (const json::exception& e) {
            throw ParseError(n, e.what());
        }
    }
    std::vector<int> out;
    for (const auto& o : data.objects) {
        const auto it = by_id.find(o.id);
        if (it == by_id.end()) throw SchemaError("no prediction for object '" + o.id + "'");
        if (it->second < 0 || it->second >= static_cast<int>(data.class_count()))
            throw SchemaError("prediction for object '" + o.id + "' is not a valid class index");
        out.push_back(it->second);
    }
    return out;
}

void cmd_eval(const EvalArgs& a) {
    auto m = start_run("eval", a.out);
    if (!a.model.empty() || !a.predictions.empty()) {
        if (!a.seeds.empty()) throw ConfigError("--seeds trains fresh models and cannot be combined with --model");
        const auto raw = load_dataset(m, a.data);
        std::vector<int> predicted;
        if (!a.predictions.empty()) {
            predicted = predictions_from_file(a.predictions, raw);
            m.input(a.predictions);
        } else {
            const auto model = load_model(m, a.model);
            if (model.class_names != raw.class_names) throw SchemaError("dataset classes differ from the model's");
            const auto comps = components_for(model, raw);
            predicted = model.net.predict_labels(comps);
        }
        m.config = {{"mode", a.predictions.empty() ? "model" : "predictions"}};
        write_eval(m, confusion(predicted, raw.labels(), static_cast<int>(raw.class_count())), raw.class_names);
        m.finish();
        return;
    }

    // fresh split and model per seed, then mean +- std
    const auto config = a.flags.resolve();
    const auto seeds = parse_seeds(a.seeds.empty() ? "0..4" : a.seeds);
    m.config = to_json(config);
    m.config["baseline"] = a.baseline;
    m.seeds = seeds;
    std::fprintf(stderr, "resolved config: %s\n", m.config.dump().c_str());
    const auto raw = load_dataset(m, a.data);
    std::vector<MetricReport> tassel(seeds.size()), mlp(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        auto c = config;
        c.seed = seeds[i];
        const auto split = prepare_split(raw, c.n_components, c.seed, c.kmeans());
        const auto model = train_tassel(split, c);
        tassel[i] = evaluate(model.net, split.test, split.test_labels, split.classes()).report;
        if (a.baseline) mlp[i] = run_baseline(split, c).report;
    });

    std::string csv = metric_csv_header() + "\n";
    json runs = json::array();
    auto summarize = [&](const std::string& name, const std::vector<MetricReport>& reports) {
        std::vector<double> acc, kappa, wf1;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            csv += metric_csv_row(name + "_seed" + std::to_string(seeds[i]), reports[i]) + "\n";
            acc.push_back(reports[i].accuracy);
            kappa.push_back(reports[i].kappa);
            wf1.push_back(reports[i].weighted_f1);
        }
        const auto a_ = mean_std(acc), k_ = mean_std(kappa), f_ = mean_std(wf1);
        std::printf("%-8s weighted F1 %6.2f +- %5.2f   kappa %.4f +- %.4f   accuracy %6.2f +- %5.2f\n", name.c_str(),
                    100 * f_.mean, 100 * f_.std, k_.mean, k_.std, 100 * a_.mean, 100 * a_.std);
        runs.push_back({{"model", name},
                        {"weighted_f1", {{"mean", f_.mean}, {"std", f_.std}}},
                        {"kappa", {{"mean", k_.mean}, {"std", k_.std}}},
                        {"accuracy", {{"mean", a_.mean}, {"std", a_.std}}}});
    };
    summarize(config.lambda > 0.0 ? "tassel" : "tassel_noaux", tassel);
    if (a.baseline) summarize("mlp", mlp);
    m.write("metrics_by_seed.csv", csv);
    m.write("summary.json", runs.dump(2) + "\n");
    m.finish();
}

struct PredictArgs {
    std::string data, model, out;
};

void cmd_predict(const PredictArgs& a) {
    auto m = start_run("predict", a.out);
    const auto model = load_model(m, a.model);
    const auto raw = load_dataset(m, a.data);
    const auto comps = components_for(model, raw);
    const auto preds = model.net.predict(comps);
    std::string text;
    for (const auto& p : preds) text += prediction_json(p, model.class_names).dump() + "\n";
    m.write("predictions.ndjson", text);
    m.finish();
    std::printf("predicted %zu objects\n", preds.size());
}

struct ExplainArgs {
    std::string data, model, out, ids;
    int bins = kDefaultBins;
};

void cmd_explain(const ExplainArgs& a) {
    if (a.bins < 2) throw ConfigError("--bins must be >= 2");
    auto m = start_run("explain", a.out);
    m.config = {{"bins", a.bins}, {"ids", a.ids}};
    const auto model = load_model(m, a.model);
    auto raw = load_dataset(m, a.data);
    if (!a.ids.empty()) {
        std::vector<std::string> wanted;
        std::stringstream ss(a.ids);
        for (std::string id; std::getline(ss, id, ',');) wanted.push_back(id);
        std::vector<std::size_t> keep;
        for (const auto& id : wanted) {
            std::size_t i = 0;
            while (i < raw.objects.size() && raw.objects[i].id != id) ++i;
            if (i == raw.objects.size()) throw SchemaError("object '" + id + "' is not in the dataset");
            keep.push_back(i);
        }
        raw = raw.subset(keep);
    }
    const auto comps = components_for(model, raw);
    const auto preds = model.net.predict(comps);
    json index = json::array();
    std::size_t rasters = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& obj = raw.objects[i];
        const auto map = build_map(preds[i], comps[i], obj.coords);
        json entry = prediction_json(preds[i], model.class_names);
        entry["csv"] = obj.id + ".csv";
        m.write(obj.id + ".csv", export_csv(map, a.bins));
        if (map.has_coords()) {
            m.write(obj.id + ".pgm", render_pgm(map, a.bins));
            entry["pgm"] = obj.id + ".pgm";
            entry["raster"] = pgm_sidecar(map, a.bins);
            ++rasters;
        }
        index.push_back(entry);
    }
    m.write("index.json", index.dump(2) + "\n");
    m.finish();
    std::printf("explained %zu objects (%zu rasters, %d bins) in %s\n", preds.size(), rasters, a.bins, a.out.c_str());
}

struct SweepArgs {
    std::string data, out, values = "2,4,6,8,10", seeds = "0..4";
    TrainFlags flags;
};

void cmd_sweep(const SweepArgs& a) {
    auto m = start_run("sweep-nc", a.out);
    const auto config = a.flags.resolve();
    std::vector<int> values;
    for (auto v : parse_seeds(a.values)) values.push_back(static_cast<int>(v));
    const auto seeds = parse_seeds(a.seeds);
    m.config = to_json(config);
    m.config["values"] = values;
    m.seeds = seeds;
    std::fprintf(stderr, "resolved config: %s\n", m.config.dump().c_str());
    const auto raw = load_dataset(m, a.data);

    std::vector<double> f1(values.size() * seeds.size());
    parallel_for(f1.size(), [&](std::size_t job) {
        auto c = config;
        c.n_components = values[job / seeds.size()];
        c.seed = seeds[job % seeds.size()];
        const auto split = prepare_split(raw, c.n_components, c.seed, c.kmeans());
        const auto model = train_tassel(split, c);
        f1[job] = evaluate(model.net, split.test, split.test_labels, split.classes()).report.weighted_f1;
    });
    std::string csv = "nc,mean_weighted_f1,std_weighted_f1,runs\n";
    for (std::size_t v = 0; v < values.size(); ++v) {
        const auto ms = mean_std(std::span<const double>(f1).subspan(v * seeds.size(), seeds.size()));
        char row[128];
        std::snprintf(row, sizeof row, "%d,%.9g,%.9g,%zu\n", values[v], ms.mean, ms.std, seeds.size());
        csv += row;
        std::printf("nc=%-3d weighted F1 %6.2f +- %5.2f\n", values[v], 100 * ms.mean, 100 * ms.std);
    }
    m.write("sweep.csv", csv);
    m.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TASSEL object-based satellite image time series classifier"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TASSEL_VERSION);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    s->add_option("--config", synth.config_file, "JSON file with generator options")->check(CLI::ExistingFile);
    s->add_option("--length", synth.config.length);
    s->add_option("--bands", synth.config.bands);
    s->add_option("--classes", synth.config.classes);
    s->add_option("--objects_per_class,--objects-per-class", synth.config.objects_per_class);
    s->add_option("--min_pixels,--min-pixels", synth.config.min_pixels);
    s->add_option("--max_pixels,--max-pixels", synth.config.max_pixels);
    s->add_option("--distractor_fraction,--distractor-fraction", synth.config.distractor_fraction);
    s->add_option("--noise_sigma,--noise-sigma", synth.config.noise_sigma);
    s->add_option("--seed", synth.config.seed);
    s->add_option("--out", synth.out, "run directory")->required();

    ClusterArgs cluster;
    auto* c = app.add_subcommand("cluster", "extract per-object K-means components");
    c->add_option("--data", cluster.data, "NDJSON dataset")->required()->check(CLI::ExistingFile);
    c->add_option("--n_components,--n-components,--nc", cluster.nc);
    c->add_option("--seed", cluster.seed);
    c->add_option("--kmeans_restarts,--kmeans-restarts", cluster.options.restarts);
    c->add_option("--kmeans_max_iters,--kmeans-max-iters", cluster.options.max_iters);
    c->add_option("--kmeans_tol,--kmeans-tol", cluster.options.tol);
    c->add_option("--out", cluster.out, "run directory")->required();

    TrainArgs train;
    auto* t = app.add_subcommand("train", "train a model on a seeded 50/20/30 split");
    t->add_option("--data", train.data, "NDJSON dataset")->required()->check(CLI::ExistingFile);
    t->add_option("--out", train.out, "run directory")->required();
    train.flags.attach(t);

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "score a model or predictions, or average fresh runs over seeds");
    e->add_option("--data", eval.data, "NDJSON dataset")->required()->check(CLI::ExistingFile);
    auto* model_opt = e->add_option("--model", eval.model, "checkpoint to score on the whole dataset")->check(CLI::ExistingFile);
    e->add_option("--predictions", eval.predictions, "predictions.ndjson to score")
        ->check(CLI::ExistingFile)
        ->excludes(model_opt);
    e->add_option("--seeds", eval.seeds, "seeds for fresh runs, e.g. 0..4 (default)");
    e->add_flag("--baseline", eval.baseline, "also run the mean-representation MLP");
    e->add_option("--out", eval.out, "run directory")->required();
    eval.flags.attach(e);

    PredictArgs predict;
    auto* p = app.add_subcommand("predict", "predict labels and attention for every object");
    p->add_option("--data", predict.data, "NDJSON dataset")->required()->check(CLI::ExistingFile);
    p->add_option("--model", predict.model, "checkpoint")->required()->check(CLI::ExistingFile);
    p->add_option("--out", predict.out, "run directory")->required();

    ExplainArgs explain;
    auto* x = app.add_subcommand("explain", "write per-object attention maps");
    x->add_option("--data", explain.data, "NDJSON dataset")->required()->check(CLI::ExistingFile);
    x->add_option("--model", explain.model, "checkpoint")->required()->check(CLI::ExistingFile);
    x->add_option("--bins", explain.bins, "quantile bins");
    x->add_option("--ids", explain.ids, "comma separated object ids (default: all)");
    x->add_option("--out", explain.out, "run directory")->required();

    SweepArgs sweep;
    auto* w = app.add_subcommand("sweep-nc", "weighted F1 per number of components");
    w->add_option("--data", sweep.data, "NDJSON dataset")->required()->check(CLI::ExistingFile);
    w->add_option("--values", sweep.values, "component counts, e.g. 2,4,6,8,10");
    w->add_option("--seeds", sweep.seeds, "seeds, e.g. 0..4");
    w->add_option("--out", sweep.out, "run directory")->required();
    sweep.flags.attach(w);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForVersion& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        std::cerr << "error: " << err.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*s) cmd_synth(synth, *s);
        else if (*c) cmd_cluster(cluster);
        else if (*t) cmd_train(train);
        else if (*e) cmd_eval(eval);
        else if (*p) cmd_predict(predict);
        else if (*x) cmd_explain(explain);
        else if (*w) cmd_sweep(sweep);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return err.exit_code();
    } catch (const json::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
