#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace noisebench::data {

struct ClassLabel {
    int index = -1;
    std::string name;

    bool operator==(const ClassLabel&) const = default;
};

// One labeled 1D signal, samples in raw amplitude units.
struct SignalRecord {
    std::string id;
    std::vector<double> samples;
    double sampling_rate_hz = 0.0;
    ClassLabel label;

    bool operator==(const SignalRecord&) const = default;
};

// Fixed-length training/evaluation unit cut from a record.
struct Window {
    std::vector<double> values;
    ClassLabel label;
    std::string source_id;

    bool operator==(const Window&) const = default;
};

struct SplitSpec {
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct Dataset {
    std::vector<SignalRecord> records;
    std::vector<std::string> class_names;  // dense labels 0..K-1, order of first appearance
};

struct Split {
    std::vector<SignalRecord> train;
    std::vector<SignalRecord> val;
    std::vector<SignalRecord> test;
};

// Manifest: UTF-8 CSV with header `id,label,sampling_rate_hz,path`, paths
// relative to the manifest directory; signal files hold one decimal per line.
Dataset load_dataset(const std::string& manifest_path);

// Writes records in the manifest format; returns the manifest path.
std::string write_dataset(const Dataset& dataset, const std::string& out_dir);

// Deterministic synthetic pulse-train dataset. Each class gets its own
// (period, width, amplitude sign, jitter) tuple; records are rescaled so the
// per-record sample std lands in [85, 115] amplitude units.
Dataset synth_dataset(int classes, int records_per_class, int record_length, std::uint64_t seed);

// Stratified per-class split, largest-remainder rounding, >=1 record per
// class in every part. Partitions preserve input order.
Split split(const std::vector<SignalRecord>& records, const SplitSpec& spec);

std::vector<Window> window(const SignalRecord& record, int length, int stride);

std::vector<Window> window_all(const std::vector<SignalRecord>& records, int length, int stride);

// Mean 0, std 1 (population convention); all zeros if input std < 1e-12.
Window standardize(const Window& w);

std::vector<Window> standardize_all(const std::vector<Window>& windows);

double mean_of(const std::vector<double>& v);
double std_of(const std::vector<double>& v);  // population (divide by N)

}  // namespace noisebench::data
