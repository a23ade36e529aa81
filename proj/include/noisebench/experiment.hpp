#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noisebench/augment.hpp"
#include "noisebench/dataset.hpp"
#include "noisebench/metrics.hpp"
#include "noisebench/nn.hpp"
#include "noisebench/noise.hpp"

namespace noisebench::experiment {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Classifier { kCnn, kSepCnn };

std::string classifier_name(Classifier c);
Classifier classifier_from_name(const std::string& name);

struct SynthSpec {
    int classes = 4;
    int records_per_class = 50;
    int record_length = 1024;
    std::uint64_t seed = 11;
};

struct DatasetSource {
    bool use_synth = true;
    SynthSpec synth;
    std::string manifest_path;
};

struct GridConfig {
    DatasetSource dataset;
    data::SplitSpec split{0.6, 0.2, 0.2, 7};
    int window_length = 256;
    int window_stride = 128;
    std::vector<Classifier> classifiers{Classifier::kCnn, Classifier::kSepCnn};
    std::vector<augment::AugmentKind> augmentations{augment::AugmentKind::kNone,
                                                    augment::AugmentKind::kGmm};
    std::vector<double> linear_strengths{0.0, 0.2, 0.4, 0.6, 0.8};
    std::vector<double> awgn_strengths{0.0, 20.0, 40.0, 60.0, 80.0};
    double linear_x_scale = 1.0;
    int gmm_components = 3;
    int gmm_target_per_class = 0;  // 0 = match-majority
    int gmm_max_iters = 100;
    double gmm_tol = 1e-6;
    nn::TrainConfig train;
    metrics::Averaging metric = metrics::Averaging::kMacro;
    std::uint64_t global_seed = 1;
    std::string output_dir = "out";
};

// One point of the {classifier x augmentation x noise kind x strength} grid.
struct CellKey {
    Classifier classifier;
    augment::AugmentKind augmentation;
    noise::Kind noise_kind;
    double strength = 0.0;
};

// Zero strength always denotes the shared clean baseline.
CellKey normalize_cell(const CellKey& key);
std::string cell_identity(const CellKey& key);
std::uint64_t cell_seed(std::uint64_t global_seed, const CellKey& key);

struct CellResult {
    std::string classifier;
    std::string augmentation;
    std::string noise_kind;
    double strength = 0.0;
    double f1 = 0.0;  // fraction in [0,1]; rendered as percent with 2 decimals
    int epochs_run = 0;
    int best_epoch = 0;
    double wall_seconds = 0.0;
    std::uint64_t cell_seed = 0;
    std::uint64_t test_checksum = 0;
    std::vector<nn::EpochStats> history;
    std::vector<std::string> warnings;
};

struct CellFailure {
    std::string identity;
    std::string message;
};

struct GridRunResult {
    std::vector<CellResult> results;  // expanded per (kind, strength), baselines shared
    std::vector<CellFailure> failures;
    int training_runs = 0;
    bool test_checksum_consistent = true;
};

std::vector<nn::LayerSpec> make_arch(Classifier classifier, int num_classes);

void validate_config(const GridConfig& config);

// Trained model and per-class GMMs from one cell, for checkpointing/inspection.
struct CellArtifacts {
    nn::Model model;
    std::map<int, augment::GmmModel> gmm_models;
};

// Fixed pipeline: load -> split -> window -> corrupt TRAIN only -> augment
// TRAIN only -> standardize all splits -> train -> macro F1 on the clean test
// windows. Fully determined by (config, key).
CellResult run_cell(const GridConfig& config, const CellKey& key,
                    CellArtifacts* artifacts = nullptr);

// Runs every distinct cell (strength 0 once per classifier/augmentation pair),
// up to `jobs` cells concurrently; results ordered by
// (classifier, augmentation, kind, strength) with baselines duplicated per kind.
GridRunResult run_grid(const GridConfig& config, int jobs = 1);

// Writes table.csv (Table-1 layout), curves.csv (long format) and run.json.
void write_report(const GridRunResult& run, const GridConfig& config,
                  const std::string& output_dir);

GridConfig config_from_json_text(const std::string& text);
GridConfig load_config(const std::string& path);  // accepts a config or a run.json
std::string config_to_json_text(const GridConfig& config);

// Re-render table.csv and curves.csv from a previously written run.json.
void rerender_report(const std::string& run_json_path, const std::string& output_dir);

}  // namespace noisebench::experiment
