#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace tassel {

/// C x C counts; rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes);

    int classes() const { return classes_; }
    std::int64_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
    void add(int truth, int predicted);
    std::int64_t total() const;
    std::int64_t row_sum(int truth) const;
    std::int64_t col_sum(int predicted) const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t index(int truth, int predicted) const;

    int classes_;
    std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth, int classes);

struct MetricReport {
    double accuracy = 0.0;
    double kappa = 0.0;
    double weighted_f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::int64_t> support;
};

/// Accuracy, Cohen's kappa and per-class / averaged F1. Undefined ratios
/// (zero denominators) are reported as 0; kappa is 1 when chance agreement
/// is already total and the matrix is perfect.
MetricReport metrics(const ConfusionMatrix& cm);

nlohmann::json to_json(const MetricReport& report, std::span<const std::string> class_names = {});
nlohmann::json to_json(const ConfusionMatrix& cm);

/// Fixed-column CSV for cross-run aggregation.
std::string metric_csv_header();
std::string metric_csv_row(const std::string& run, const MetricReport& report);

/// Mean and sample standard deviation (n - 1; 0 for a single value).
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

}  // namespace tassel
