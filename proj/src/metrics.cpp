#include "tassel/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "tassel/error.hpp"

namespace tassel {

ConfusionMatrix::ConfusionMatrix(int classes) : classes_(classes) {
    if (classes < 1) throw ConfigError("confusion matrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0);
}

std::size_t ConfusionMatrix::index(int truth, int predicted) const {
    if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_)
        throw IndexError("class index outside [0, " + std::to_string(classes_) + ")");
    return static_cast<std::size_t>(truth) * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(predicted);
}

void ConfusionMatrix::add(int truth, int predicted) { ++counts_[index(truth, predicted)]; }

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (auto c : counts_) n += c;
    return n;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
    std::int64_t n = 0;
    for (int p = 0; p < classes_; ++p) n += at(truth, p);
    return n;
}

std::int64_t ConfusionMatrix::col_sum(int predicted) const {
    std::int64_t n = 0;
    for (int t = 0; t < classes_; ++t) n += at(t, predicted);
    return n;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth, int classes) {
    if (predicted.size() != truth.size())
        throw ContractError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                            std::to_string(truth.size()) + " labels");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
}

MetricReport metrics(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw ContractError("metrics of an empty confusion matrix");
    const int c = cm.classes();
    const double n = static_cast<double>(total);
    MetricReport r;
    r.precision.resize(static_cast<std::size_t>(c));
    r.recall.resize(static_cast<std::size_t>(c));
    r.f1.resize(static_cast<std::size_t>(c));
    r.support.resize(static_cast<std::size_t>(c));

    double diag = 0.0, chance = 0.0;
    for (int k = 0; k < c; ++k) {
        const double tp = static_cast<double>(cm.at(k, k));
        const double row = static_cast<double>(cm.row_sum(k));
        const double col = static_cast<double>(cm.col_sum(k));
        diag += tp;
        chance += (row / n) * (col / n);
        r.precision[k] = col > 0 ? tp / col : 0.0;
        r.recall[k] = row > 0 ? tp / row : 0.0;
        const double pr = r.precision[k] + r.recall[k];
        r.f1[k] = pr > 0 ? 2.0 * r.precision[k] * r.recall[k] / pr : 0.0;
        r.support[k] = cm.row_sum(k);
    }
    r.accuracy = diag / n;
    if (chance < 1.0)
        r.kappa = (r.accuracy - chance) / (1.0 - chance);
    else
        r.kappa = r.accuracy == 1.0 ? 1.0 : 0.0;

    double weighted = 0.0, macro = 0.0;
    for (int k = 0; k < c; ++k) {
        weighted += r.f1[k] * static_cast<double>(r.support[k]);
        macro += r.f1[k];
    }
    r.weighted_f1 = weighted / n;
    r.macro_f1 = macro / c;
    return r;
}

nlohmann::json to_json(const MetricReport& r, std::span<const std::string> class_names) {
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t k = 0; k < r.f1.size(); ++k) {
        nlohmann::json entry = {{"index", k},
                                {"precision", r.precision[k]},
                                {"recall", r.recall[k]},
                                {"f1", r.f1[k]},
                                {"support", r.support[k]}};
        if (k < class_names.size()) entry["name"] = class_names[k];
        per_class.push_back(entry);
    }
    return {{"accuracy", r.accuracy},
            {"kappa", r.kappa},
            {"weighted_f1", r.weighted_f1},
            {"macro_f1", r.macro_f1},
            {"per_class", per_class}};
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
    nlohmann::json rows = nlohmann::json::array();
    for (int t = 0; t < cm.classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < cm.classes(); ++p) row.push_back(cm.at(t, p));
        rows.push_back(row);
    }
    return rows;
}

std::string metric_csv_header() { return "run,accuracy,kappa,weighted_f1,macro_f1,total"; }

std::string metric_csv_row(const std::string& run, const MetricReport& r) {
    std::int64_t total = 0;
    for (auto s : r.support) total += s;
    char buf[256];
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%lld", r.accuracy, r.kappa, r.weighted_f1, r.macro_f1,
                  static_cast<long long>(total));
    return run + buf;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

}  // namespace tassel
