#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "noisebench/augment.hpp"
#include "noisebench/dataset.hpp"
#include "noisebench/experiment.hpp"
#include "noisebench/metrics.hpp"
#include "noisebench/nn.hpp"
#include "noisebench/noise.hpp"
#include "noisebench/rng.hpp"

namespace nb = noisebench;
using nb::experiment::GridConfig;

namespace {

GridConfig resolve_config(const std::string& config_path, std::uint64_t* seed_override,
                          const std::string* out_override) {
    GridConfig config;
    if (!config_path.empty()) {
        config = nb::experiment::load_config(config_path);
    } else {
        nb::experiment::validate_config(config);
    }
    if (seed_override) config.global_seed = *seed_override;
    if (out_override && !out_override->empty()) config.output_dir = *out_override;
    return config;
}

nb::noise::NoiseSpec parse_noise_spec(const std::string& text, std::uint64_t seed,
                                      double x_scale) {
    nb::noise::NoiseSpec spec;
    spec.x_scale = x_scale;
    spec.seed = seed;
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    spec.kind = nb::noise::kind_from_name(kind);
    if (colon != std::string::npos) {
        spec.strength = std::stod(text.substr(colon + 1));
    } else if (spec.kind != nb::noise::Kind::kNone) {
        throw nb::experiment::ConfigError("spec '" + text + "' needs kind:strength");
    }
    return spec;
}

int cmd_synth(int classes, int records_per_class, int length, std::uint64_t seed,
              const std::string& out_dir) {
    const auto dataset = nb::data::synth_dataset(classes, records_per_class, length, seed);
    const std::string manifest = nb::data::write_dataset(dataset, out_dir);
    std::cout << "wrote " << dataset.records.size() << " records to " << manifest << "\n";
    return 0;
}

int cmd_preview(const std::string& manifest, const std::string& record_id,
                const std::vector<std::string>& spec_texts, std::uint64_t seed, double x_scale,
                const std::string& out_path) {
    nb::data::SignalRecord record;
    if (manifest.empty()) {
        auto dataset = nb::data::synth_dataset(4, 1, 1024, seed);
        record = std::move(dataset.records[0]);
    } else {
        auto dataset = nb::data::load_dataset(manifest);
        bool found = record_id.empty();
        if (found) {
            record = std::move(dataset.records[0]);
        } else {
            for (auto& r : dataset.records) {
                if (r.id == record_id) {
                    record = std::move(r);
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            throw nb::experiment::ConfigError("record id '" + record_id + "' not in manifest");
        }
    }

    std::vector<std::string> texts = spec_texts;
    if (texts.empty()) {
        texts = {"linear:0.2", "linear:0.4", "linear:0.6", "linear:0.8",
                 "awgn:20",    "awgn:40",    "awgn:60",    "awgn:80"};
    }
    std::vector<nb::noise::NoiseSpec> specs;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        specs.push_back(parse_noise_spec(texts[i], nb::seed_combine(seed, i), x_scale));
    }
    nb::noise::preview(record, specs, out_path);
    std::cout << "wrote " << out_path << " (" << record.samples.size() << " rows, "
              << specs.size() + 2 << " columns)\n";
    return 0;
}

int cmd_train(const GridConfig& config, const std::string& classifier, const std::string& aug,
              const std::string& noise_kind, double strength, const std::string& out_path,
              const std::string& model_path, const std::string& gmm_dir) {
    nb::experiment::CellKey key;
    key.classifier = nb::experiment::classifier_from_name(classifier);
    key.augmentation = nb::augment::augment_from_name(aug);
    key.noise_kind = nb::noise::kind_from_name(noise_kind);
    key.strength = strength;

    nb::experiment::CellArtifacts artifacts;
    const bool want_artifacts = !model_path.empty() || !gmm_dir.empty();
    const auto result =
        nb::experiment::run_cell(config, key, want_artifacts ? &artifacts : nullptr);
    std::cout << result.classifier << " " << result.augmentation << " " << result.noise_kind << " "
              << result.strength << " -> F1 " << nb::metrics::format_percent(result.f1) << " ("
              << result.epochs_run << " epochs, best " << result.best_epoch << ", "
              << result.wall_seconds << " s)\n";

    if (!out_path.empty()) {
        nlohmann::json j;
        j["classifier"] = result.classifier;
        j["augmentation"] = result.augmentation;
        j["noise_kind"] = result.noise_kind;
        j["strength"] = result.strength;
        j["f1"] = result.f1;
        j["f1_percent"] = nb::metrics::format_percent(result.f1);
        j["epochs_run"] = result.epochs_run;
        j["best_epoch"] = result.best_epoch;
        j["wall_seconds"] = result.wall_seconds;
        j["cell_seed"] = result.cell_seed;
        char checksum_hex[24];
        std::snprintf(checksum_hex, sizeof(checksum_hex), "%016llx",
                      static_cast<unsigned long long>(result.test_checksum));
        j["test_checksum"] = checksum_hex;
        j["warnings"] = result.warnings;
        nlohmann::json history = nlohmann::json::array();
        for (const auto& e : result.history) {
            history.push_back({{"train_loss", e.train_loss}, {"val_macro_f1", e.val_macro_f1}});
        }
        j["history"] = history;
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << j.dump(2) << '\n';
        std::cout << "wrote " << out_path << "\n";
    }
    if (!model_path.empty()) {
        nb::nn::save_model(artifacts.model, model_path);
        std::cout << "wrote " << model_path << "\n";
    }
    if (!gmm_dir.empty()) {
        std::filesystem::create_directories(gmm_dir);
        for (const auto& [cls, model] : artifacts.gmm_models) {
            const auto path =
                std::filesystem::path(gmm_dir) / ("gmm_class" + std::to_string(cls) + ".csv");
            nb::augment::write_model_csv(model, path.string());
            std::cout << "wrote " << path.string() << "\n";
        }
    }
    return 0;
}

int cmd_grid(const GridConfig& config, int jobs) {
    const auto run = nb::experiment::run_grid(config, jobs);
    nb::experiment::write_report(run, config, config.output_dir);
    std::cout << run.training_runs << " training runs, " << run.results.size()
              << " grid cells -> " << config.output_dir << "/table.csv\n";
    for (const auto& f : run.failures) {
        std::cerr << "cell " << f.identity << " failed: " << f.message << "\n";
    }
    if (!run.test_checksum_consistent) {
        std::cerr << "warning: test-set checksum differs across cells\n";
        return 1;
    }
    return run.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noisebench: noise-robustness benchmark for 1D convolutional classifiers"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "emit a synthetic dataset + manifest");
    int classes = 4, records_per_class = 50, length = 1024;
    std::uint64_t synth_seed = 11;
    std::string synth_out = "data";
    synth->add_option("--classes", classes, "number of classes");
    synth->add_option("--records-per-class", records_per_class, "records per class");
    synth->add_option("--length", length, "samples per record");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output directory");

    // preview-noise
    auto* preview = app.add_subcommand("preview-noise", "write a clean-vs-noisy CSV");
    std::string pv_manifest, pv_record, pv_out = "preview.csv";
    std::vector<std::string> pv_specs;
    std::uint64_t pv_seed = 1;
    double pv_x_scale = 1.0;
    preview->add_option("--manifest", pv_manifest, "dataset manifest (default: synthetic record)");
    preview->add_option("--record-id", pv_record, "record to corrupt (default: first)");
    preview->add_option("--spec", pv_specs, "noise column, kind:strength (repeatable)");
    preview->add_option("--seed", pv_seed, "seed for AWGN columns");
    preview->add_option("--x-scale", pv_x_scale, "linear noise x scale (samples)");
    preview->add_option("--out", pv_out, "output CSV path");

    // train
    auto* train = app.add_subcommand("train", "run a single grid cell");
    std::string tr_config, tr_classifier = "CNN", tr_aug = "NONE", tr_kind = "NONE", tr_out;
    std::string tr_model, tr_gmm_dir;
    double tr_strength = 0.0;
    std::uint64_t tr_seed = 0;
    bool tr_seed_set = false;
    train->add_option("--config", tr_config, "grid config JSON (or a previous run.json)");
    train->add_option("--classifier", tr_classifier, "CNN or SEPCNN");
    train->add_option("--aug", tr_aug, "NONE, OVERSAMPLE or GMM");
    train->add_option("--noise-kind", tr_kind, "NONE, LINEAR or AWGN");
    train->add_option("--strength", tr_strength, "noise strength (0 = clean baseline)");
    train->add_option("--seed", tr_seed, "override global seed")->each([&](const std::string&) {
        tr_seed_set = true;
    });
    train->add_option("--out", tr_out, "write the cell result JSON here");
    train->add_option("--save-model", tr_model, "write the trained model checkpoint here");
    train->add_option("--dump-gmm", tr_gmm_dir, "write per-class GMM CSVs into this directory");

    // grid
    auto* grid = app.add_subcommand("grid", "run the full experiment grid");
    std::string gr_config, gr_out;
    int gr_jobs = 1;
    std::uint64_t gr_seed = 0;
    bool gr_seed_set = false;
    grid->add_option("--config", gr_config, "grid config JSON (or a previous run.json)");
    grid->add_option("--jobs", gr_jobs, "concurrent cells");
    grid->add_option("--seed", gr_seed, "override global seed")->each([&](const std::string&) {
        gr_seed_set = true;
    });
    grid->add_option("--out", gr_out, "override output directory");

    // report
    auto* report = app.add_subcommand("report", "re-render table.csv/curves.csv from run.json");
    std::string rp_run = "out/run.json", rp_out = "out";
    report->add_option("--run", rp_run, "run.json path");
    report->add_option("--out", rp_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(classes, records_per_class, length, synth_seed, synth_out);
        }
        if (preview->parsed()) {
            return cmd_preview(pv_manifest, pv_record, pv_specs, pv_seed, pv_x_scale, pv_out);
        }
        if (train->parsed()) {
            GridConfig config = resolve_config(tr_config, tr_seed_set ? &tr_seed : nullptr, nullptr);
            return cmd_train(config, tr_classifier, tr_aug, tr_kind, tr_strength, tr_out, tr_model,
                             tr_gmm_dir);
        }
        if (grid->parsed()) {
            GridConfig config = resolve_config(gr_config, gr_seed_set ? &gr_seed : nullptr, &gr_out);
            return cmd_grid(config, gr_jobs);
        }
        if (report->parsed()) {
            nb::experiment::rerender_report(rp_run, rp_out);
            std::cout << "re-rendered " << rp_out << "/table.csv and curves.csv\n";
            return 0;
        }
    } catch (const nb::experiment::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
