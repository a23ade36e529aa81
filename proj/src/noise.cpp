#include "noisebench/noise.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "noisebench/rng.hpp"

namespace noisebench::noise {

std::string kind_name(Kind kind) {
    switch (kind) {
        case Kind::kAwgn: return "AWGN";
        case Kind::kLinear: return "LINEAR";
        default: return "NONE";
    }
}

Kind kind_from_name(const std::string& name) {
    if (name == "AWGN" || name == "awgn") return Kind::kAwgn;
    if (name == "LINEAR" || name == "linear") return Kind::kLinear;
    if (name == "NONE" || name == "none") return Kind::kNone;
    throw std::invalid_argument("unknown noise kind '" + name + "'");
}

std::vector<double> apply_awgn(const std::vector<double>& values, double sigma,
                               std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("apply_awgn: sigma must be >= 0");
    if (sigma == 0.0) return values;
    std::vector<double> out = values;
    Rng rng(seed);
    for (double& x : out) x += sigma * rng.next_gaussian();
    return out;
}

std::vector<double> apply_linear(const std::vector<double>& values, double slope,
                                 double x_scale) {
    if (slope < 0.0) throw std::invalid_argument("apply_linear: slope must be >= 0");
    if (!(x_scale > 0.0)) throw std::invalid_argument("apply_linear: x_scale must be > 0");
    if (slope == 0.0) return values;
    std::vector<double> out = values;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += slope * (static_cast<double>(i) / x_scale);
    }
    return out;
}

std::vector<double> apply(const std::vector<double>& values, const NoiseSpec& spec) {
    if (spec.kind == Kind::kNone || spec.strength == 0.0) return values;
    if (spec.kind == Kind::kAwgn) return apply_awgn(values, spec.strength, spec.seed);
    return apply_linear(values, spec.strength, spec.x_scale);
}

std::vector<data::Window> corrupt_training_set(const std::vector<data::Window>& windows,
                                               const NoiseSpec& spec, std::uint64_t run_seed) {
    if (spec.kind == Kind::kNone || spec.strength == 0.0) return windows;
    std::vector<data::Window> out;
    out.reserve(windows.size());
    const std::uint64_t base = seed_combine(run_seed, spec.seed);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        data::Window w = windows[i];
        NoiseSpec per_window = spec;
        per_window.seed = seed_combine(base, static_cast<std::uint64_t>(i));
        w.values = apply(w.values, per_window);
        out.push_back(std::move(w));
    }
    return out;
}

namespace {

std::string column_name(const NoiseSpec& spec) {
    if (spec.kind == Kind::kNone) return "none";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_%g",
                  spec.kind == Kind::kAwgn ? "awgn" : "linear", spec.strength);
    return buf;
}

}  // namespace

void preview(const data::SignalRecord& record, const std::vector<NoiseSpec>& specs,
             const std::string& out_path) {
    if (record.samples.empty()) throw std::invalid_argument("preview: record has no samples");

    std::vector<std::vector<double>> columns;
    columns.reserve(specs.size());
    for (const auto& spec : specs) columns.push_back(apply(record.samples, spec));

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("preview: cannot write " + out_path);
    out << "index,clean";
    for (const auto& spec : specs) out << ',' << column_name(spec);
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < record.samples.size(); ++i) {
        out << i;
        std::snprintf(buf, sizeof(buf), "%.17g", record.samples[i]);
        out << ',' << buf;
        for (const auto& col : columns) {
            std::snprintf(buf, sizeof(buf), "%.17g", col[i]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("preview: write failed for " + out_path);
}

}  // namespace noisebench::noise
