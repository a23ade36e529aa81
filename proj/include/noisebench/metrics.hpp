#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace noisebench::metrics {

// rows = true class, columns = predicted class
struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<std::int64_t> counts;  // row-major K x K

    std::int64_t& at(int t, int p) { return counts[static_cast<std::size_t>(t) * num_classes + p]; }
    std::int64_t at(int t, int p) const { return counts[static_cast<std::size_t>(t) * num_classes + p]; }
    std::int64_t total() const;
};

struct F1Report {
    std::vector<double> per_class_f1;    // 0 for unsupported classes
    std::vector<std::int64_t> support;   // true-label counts per class
    double macro_f1 = 0.0;               // mean over classes with support > 0
    double weighted_f1 = 0.0;            // support-weighted mean
};

enum class Averaging { kMacro, kWeighted };

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int num_classes);

F1Report macro_f1(const ConfusionMatrix& cm);

// Table-style rendering of a score in [0,1], e.g. 0.8076 -> "80.76".
std::string format_percent(double fraction);

}  // namespace noisebench::metrics
