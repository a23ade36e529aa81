#include "noisebench/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace noisebench::metrics {

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int num_classes) {
    if (y_true.size() != y_pred.size()) {
        throw std::invalid_argument("confusion: y_true and y_pred lengths differ (" +
                                    std::to_string(y_true.size()) + " vs " +
                                    std::to_string(y_pred.size()) + ")");
    }
    if (y_true.empty()) {
        throw std::invalid_argument("confusion: empty label sequences");
    }
    if (num_classes < 1) {
        throw std::invalid_argument("confusion: num_classes must be >= 1");
    }
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
            throw std::invalid_argument("confusion: label out of range at index " +
                                        std::to_string(i));
        }
        ++cm.at(t, p);
    }
    return cm;
}

F1Report macro_f1(const ConfusionMatrix& cm) {
    const int k = cm.num_classes;
    if (k < 1 || cm.total() < 1) {
        throw std::invalid_argument("macro_f1: empty confusion matrix");
    }
    F1Report report;
    report.per_class_f1.assign(k, 0.0);
    report.support.assign(k, 0);

    double f1_sum = 0.0;
    double weighted_sum = 0.0;
    std::int64_t supported_total = 0;
    int supported_classes = 0;

    for (int c = 0; c < k; ++c) {
        std::int64_t row = 0, col = 0;
        for (int j = 0; j < k; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        report.support[c] = row;
        const std::int64_t diag = cm.at(c, c);
        const double precision = col > 0 ? static_cast<double>(diag) / col : 0.0;
        const double recall = row > 0 ? static_cast<double>(diag) / row : 0.0;
        const double denom = precision + recall;
        const double f1 = denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
        report.per_class_f1[c] = f1;
        if (row > 0) {  // classes never seen as true labels do not enter the mean
            f1_sum += f1;
            weighted_sum += f1 * static_cast<double>(row);
            supported_total += row;
            ++supported_classes;
        }
    }
    report.macro_f1 = supported_classes > 0 ? f1_sum / supported_classes : 0.0;
    report.weighted_f1 = supported_total > 0 ? weighted_sum / static_cast<double>(supported_total) : 0.0;
    return report;
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

}  // namespace noisebench::metrics
