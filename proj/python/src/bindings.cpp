// Python bindings. Structured results cross the boundary as JSON text and
// are decoded in tassel/__init__.py.

#include <optional>
#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "tassel/error.hpp"
#include "tassel/explain.hpp"
#include "tassel/pipeline.hpp"
#include "tassel/synth.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace tassel;

namespace {

json predictions_json(const TrainedModel& model, const std::vector<PredictionRecord>& preds) {
    json out = json::array();
    for (const auto& p : preds)
        out.push_back({{"object_id", p.object_id},
                       {"label", p.label},
                       {"class_name", model.class_names.at(static_cast<std::size_t>(p.label))},
                       {"scores", p.scores},
                       {"alpha", p.component_alpha}});
    return out;
}

std::vector<PredictionRecord> predict_raw(const TrainedModel& model, const Dataset& data) {
    return model.net.predict(components_for(model, data));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "TASSEL object-based satellite image time series classifier";
    m.attr("__version__") = TASSEL_VERSION;

    py::register_exception<Error>(m, "TasselError", PyExc_RuntimeError);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("length", [](const Dataset& d) { return d.length; })
        .def_property_readonly("bands", [](const Dataset& d) { return d.bands; })
        .def_property_readonly("class_names", [](const Dataset& d) { return d.class_names; })
        .def_property_readonly("ids",
                               [](const Dataset& d) {
                                   std::vector<std::string> ids;
                                   for (const auto& o : d.objects) ids.push_back(o.id);
                                   return ids;
                               })
        .def("labels", &Dataset::labels)
        .def("__len__", &Dataset::size)
        .def("to_ndjson", [](const Dataset& d) { return to_ndjson(d); })
        .def("save", [](const Dataset& d, const std::string& path) { save_ndjson(d, path); });

    m.def("load_dataset", [](const std::string& path) { return load_ndjson(path); });
    m.def("read_dataset", [](const std::string& text) {
        std::istringstream in(text);
        return read_ndjson(in);
    });

    m.def("_generate", [](const std::string& config) {
        auto data = generate(synth_config_from_json(json::parse(config)));
        return py::make_tuple(std::move(data.dataset), to_json(data.truth).dump());
    });

    m.def(
        "_kmeans",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> points, int k, std::uint64_t seed,
           int restarts, int max_iters, double tol) {
            if (points.ndim() != 2) throw ShapeError("points must be a 2-D array");
            const auto n = static_cast<std::size_t>(points.shape(0));
            const auto dim = static_cast<std::size_t>(points.shape(1));
            const auto res = kmeans(std::span<const double>(points.data(), n * dim), n, dim, k, seed,
                                    KMeansOptions{restarts, max_iters, tol});
            return json{{"centroids", res.centroids},
                        {"assignment", res.assignment},
                        {"inertia", res.inertia},
                        {"inertia_traces", res.inertia_traces}}
                .dump();
        },
        py::arg("points"), py::arg("k"), py::arg("seed"), py::arg("restarts"), py::arg("max_iters"), py::arg("tol"));

    m.def("_metrics", [](const std::vector<int>& predicted, const std::vector<int>& truth, int classes) {
        const auto cm = confusion(predicted, truth, classes);
        json j = to_json(metrics(cm));
        j["confusion"] = to_json(cm);
        return j.dump();
    });

    py::class_<TrainedModel>(m, "Model")
        .def_property_readonly("class_names", [](const TrainedModel& t) { return t.class_names; })
        .def_property_readonly("n_components", [](const TrainedModel& t) { return t.clustering.slots; })
        .def_property_readonly("parameter_count", [](const TrainedModel& t) { return t.net.parameter_count(); })
        .def("save", [](const TrainedModel& t, const std::string& path) { save_checkpoint(path, t); })
        .def("to_bytes", [](const TrainedModel& t) { return py::bytes(serialize_checkpoint(t)); })
        .def("_predict",
             [](const TrainedModel& t, const Dataset& d) {
                 std::vector<PredictionRecord> preds;
                 {
                     py::gil_scoped_release release;
                     preds = predict_raw(t, d);
                 }
                 return predictions_json(t, preds).dump();
             })
        .def("_evaluate",
             [](const TrainedModel& t, const Dataset& d) {
                 const auto comps = components_for(t, d);
                 const auto cm = confusion(t.net.predict_labels(comps), d.labels(), static_cast<int>(d.class_count()));
                 json j = to_json(metrics(cm), t.class_names);
                 j["confusion"] = to_json(cm);
                 return j.dump();
             })
        .def(
            "_explain",
            [](const TrainedModel& t, const Dataset& d, const std::string& object_id, int bins) {
                std::size_t i = 0;
                while (i < d.objects.size() && d.objects[i].id != object_id) ++i;
                if (i == d.objects.size()) throw SchemaError("object '" + object_id + "' is not in the dataset");
                const std::vector<std::size_t> one{i};
                const Dataset sub = d.subset(one);
                const auto comps = components_for(t, sub);
                const auto pred = t.net.predict(comps);
                const auto map = build_map(pred[0], comps[0], sub.objects[0].coords);
                json j{{"object_id", object_id},
                       {"pixel_alpha", map.pixel_alpha},
                       {"component_alpha", map.component_alpha},
                       {"assignment", map.assignment},
                       {"csv", export_csv(map, bins)}};
                if (map.has_coords()) j["pgm"] = render_pgm(map, bins);
                return j.dump();
            },
            py::arg("dataset"), py::arg("object_id"), py::arg("bins") = kDefaultBins);

    m.def("load_model", [](const std::string& path) { return load_checkpoint(path); });
    m.def("model_from_bytes", [](const py::bytes& b) { return deserialize_checkpoint(std::string(b)); });

    m.def(
        "_train",
        [](const Dataset& data, const std::string& config) {
            const auto c = train_config_from_json(json::parse(config));
            FitReport report;
            Evaluation ev;
            std::optional<TrainedModel> model;
            {
                py::gil_scoped_release release;
                const auto split = prepare_split(data, c.n_components, c.seed, c.kmeans());
                model.emplace(train_tassel(split, c, &report));
                ev = evaluate(model->net, split.test, split.test_labels, split.classes());
            }
            json info = to_json(report);
            info["test"] = to_json(ev.report, model->class_names);
            info["config"] = to_json(c);
            return py::make_tuple(std::move(*model), info.dump());
        },
        py::arg("dataset"), py::arg("config"));

    m.def(
        "_baseline",
        [](const Dataset& data, const std::string& config) {
            const auto c = train_config_from_json(json::parse(config));
            Evaluation ev;
            {
                py::gil_scoped_release release;
                const auto split = prepare_split(data, 1, c.seed, c.kmeans());
                ev = run_baseline(split, c);
            }
            return to_json(ev.report, data.class_names).dump();
        },
        py::arg("dataset"), py::arg("config"));
}
