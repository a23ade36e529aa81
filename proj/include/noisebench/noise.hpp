#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noisebench/dataset.hpp"

namespace noisebench::noise {

enum class Kind { kNone, kAwgn, kLinear };

std::string kind_name(Kind kind);
Kind kind_from_name(const std::string& name);

// strength is sigma (amplitude units) for AWGN, slope per sample for LINEAR.
// Zero strength is an exact identity for every kind.
struct NoiseSpec {
    Kind kind = Kind::kNone;
    double strength = 0.0;
    std::uint64_t seed = 0;  // AWGN only
    double x_scale = 1.0;    // LINEAR: x = index / x_scale
};

std::vector<double> apply_awgn(const std::vector<double>& values, double sigma,
                               std::uint64_t seed);

std::vector<double> apply_linear(const std::vector<double>& values, double slope,
                                 double x_scale = 1.0);

std::vector<double> apply(const std::vector<double>& values, const NoiseSpec& spec);

// Corrupts every window per spec; AWGN sub-seeds derive from
// (run_seed, spec.seed, window position). Order and labels preserved.
// Validation and test windows must never pass through here.
std::vector<data::Window> corrupt_training_set(const std::vector<data::Window>& windows,
                                               const NoiseSpec& spec, std::uint64_t run_seed);

// CSV `index, clean, <one column per spec>` for external plotting.
void preview(const data::SignalRecord& record, const std::vector<NoiseSpec>& specs,
             const std::string& out_path);

}  // namespace noisebench::noise
