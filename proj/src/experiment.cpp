#include "noisebench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "noisebench/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace noisebench::experiment {

std::string classifier_name(Classifier c) {
    return c == Classifier::kCnn ? "CNN" : "SEPCNN";
}

Classifier classifier_from_name(const std::string& name) {
    if (name == "CNN" || name == "cnn") return Classifier::kCnn;
    if (name == "SEPCNN" || name == "sepcnn" || name == "SepCNN") return Classifier::kSepCnn;
    throw ConfigError("unknown classifier '" + name + "'");
}

namespace {

std::string format_strength(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", s);
    return buf;
}

std::uint64_t window_checksum(const std::vector<data::Window>& windows) {
    std::uint64_t h = 14695981039346656037ULL;
    auto feed = [&h](const void* bytes, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(bytes);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& w : windows) {
        feed(w.values.data(), w.values.size() * sizeof(double));
        const std::int32_t label = w.label.index;
        feed(&label, sizeof(label));
    }
    return h;
}

}  // namespace

CellKey normalize_cell(const CellKey& key) {
    CellKey out = key;
    if (out.strength == 0.0 || out.noise_kind == noise::Kind::kNone) {
        out.noise_kind = noise::Kind::kNone;
        out.strength = 0.0;
    }
    return out;
}

std::string cell_identity(const CellKey& key) {
    const CellKey c = normalize_cell(key);
    return classifier_name(c.classifier) + "|" + augment::augment_name(c.augmentation) + "|" +
           noise::kind_name(c.noise_kind) + "|" + format_strength(c.strength);
}

std::uint64_t cell_seed(std::uint64_t global_seed, const CellKey& key) {
    return seed_combine(global_seed, fnv1a64(cell_identity(key)));
}

std::vector<nn::LayerSpec> make_arch(Classifier classifier, int num_classes) {
    const nn::LayerKind conv =
        classifier == Classifier::kCnn ? nn::LayerKind::kConv1d : nn::LayerKind::kSepConv1d;
    return {
        {conv, 16, 16, 1, nn::Padding::kSame},
        {nn::LayerKind::kRelu},
        {nn::LayerKind::kMaxPool1d, 4},
        {conv, 16, 32, 1, nn::Padding::kSame},
        {nn::LayerKind::kRelu},
        {nn::LayerKind::kMaxPool1d, 4},
        {nn::LayerKind::kGlobalAvgPool},
        {nn::LayerKind::kDense, 0, num_classes},
        {nn::LayerKind::kSoftmax},
    };
}

void validate_config(const GridConfig& config) {
    if (config.classifiers.empty()) throw ConfigError("config: need at least one classifier");
    if (config.augmentations.empty()) throw ConfigError("config: need at least one augmentation");
    if (config.linear_strengths.empty() && config.awgn_strengths.empty()) {
        throw ConfigError("config: need at least one noise strength list");
    }
    for (const auto* list : {&config.linear_strengths, &config.awgn_strengths}) {
        if (!list->empty() && std::find(list->begin(), list->end(), 0.0) == list->end()) {
            throw ConfigError("config: every strength list must include 0 (the clean baseline)");
        }
        for (double s : *list) {
            if (s < 0.0) throw ConfigError("config: noise strengths must be >= 0");
        }
    }
    if (config.window_length < 16) {
        throw ConfigError("config: window length must be >= 16 for the preset architectures");
    }
    if (config.window_stride < 1) throw ConfigError("config: window stride must be >= 1");
    const double frac_sum =
        config.split.train_fraction + config.split.val_fraction + config.split.test_fraction;
    if (std::abs(frac_sum - 1.0) > 1e-9) throw ConfigError("config: split fractions must sum to 1");
    if (config.train.epochs < 1) throw ConfigError("config: train.epochs must be >= 1");
    if (!(config.train.learning_rate > 0.0)) throw ConfigError("config: learning rate must be > 0");
    if (config.gmm_components < 1) throw ConfigError("config: augment.gmm_components must be >= 1");
    if (!(config.linear_x_scale > 0.0)) throw ConfigError("config: linear_noise.x_scale must be > 0");
    if (config.dataset.use_synth) {
        if (config.dataset.synth.classes < 2) throw ConfigError("config: synth classes must be >= 2");
        if (config.dataset.synth.records_per_class < 3) {
            throw ConfigError("config: synth records_per_class must be >= 3 to split");
        }
    } else if (config.dataset.manifest_path.empty()) {
        throw ConfigError("config: manifest dataset needs a path");
    }
}

namespace {

data::Dataset load_configured_dataset(const GridConfig& config) {
    if (config.dataset.use_synth) {
        const auto& s = config.dataset.synth;
        return data::synth_dataset(s.classes, s.records_per_class, s.record_length, s.seed);
    }
    return data::load_dataset(config.dataset.manifest_path);
}

}  // namespace

CellResult run_cell(const GridConfig& config, const CellKey& key, CellArtifacts* artifacts) {
    const auto t0 = std::chrono::steady_clock::now();
    const CellKey canonical = normalize_cell(key);
    const std::uint64_t seed = cell_seed(config.global_seed, canonical);

    const data::Dataset dataset = load_configured_dataset(config);
    const int num_classes = static_cast<int>(dataset.class_names.size());
    if (num_classes < 2) throw std::runtime_error("dataset has fewer than 2 classes");

    const data::Split parts = data::split(dataset.records, config.split);
    auto train_windows = data::window_all(parts.train, config.window_length, config.window_stride);
    const auto val_windows = data::window_all(parts.val, config.window_length, config.window_stride);
    const auto test_windows = data::window_all(parts.test, config.window_length, config.window_stride);

    // corrupt the training split only; validation and test stay clean
    noise::NoiseSpec noise_spec;
    noise_spec.kind = canonical.noise_kind;
    noise_spec.strength = canonical.strength;
    noise_spec.x_scale = config.linear_x_scale;
    train_windows = noise::corrupt_training_set(train_windows, noise_spec,
                                                seed_combine(seed, fnv1a64("noise")));

    augment::AugmentSpec augment_spec;
    augment_spec.kind = canonical.augmentation;
    augment_spec.gmm_components = config.gmm_components;
    augment_spec.target_per_class = config.gmm_target_per_class;
    augment_spec.gmm_max_iters = config.gmm_max_iters;
    augment_spec.gmm_tol = config.gmm_tol;
    augment_spec.seed = seed_combine(seed, fnv1a64("augment"));
    auto augmented = augment::apply_augment(train_windows, augment_spec);

    const auto train_std = data::standardize_all(augmented.windows);
    const auto val_std = data::standardize_all(val_windows);
    const auto test_std = data::standardize_all(test_windows);

    nn::TrainConfig train_config = config.train;
    train_config.seed = seed_combine(seed, fnv1a64("train"));
    const auto arch = make_arch(canonical.classifier, num_classes);
    auto trained = nn::train(arch, train_std, val_std, num_classes, train_config);

    std::vector<int> y_true;
    y_true.reserve(test_std.size());
    for (const auto& w : test_std) y_true.push_back(w.label.index);
    const auto y_pred = nn::predict(trained.model, test_std);
    const auto scores = metrics::macro_f1(metrics::confusion(y_true, y_pred, num_classes));

    CellResult result;
    result.classifier = classifier_name(canonical.classifier);
    result.augmentation = augment::augment_name(canonical.augmentation);
    result.noise_kind = noise::kind_name(canonical.noise_kind);
    result.strength = canonical.strength;
    result.f1 = config.metric == metrics::Averaging::kMacro ? scores.macro_f1 : scores.weighted_f1;
    result.epochs_run = trained.epochs_run;
    result.best_epoch = trained.best_epoch;
    result.cell_seed = seed;
    result.test_checksum = window_checksum(test_std);
    result.history = std::move(trained.history);
    result.warnings = std::move(augmented.warnings);
    if (artifacts) {
        artifacts->model = std::move(trained.model);
        artifacts->gmm_models = std::move(augmented.models);
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

GridRunResult run_grid(const GridConfig& config, int jobs) {
    validate_config(config);
    if (jobs < 1) jobs = 1;

    // distinct training runs: the 0-strength baseline appears once per
    // (classifier, augmentation) even though both kind columns display it
    std::vector<CellKey> tasks;
    for (Classifier cls : config.classifiers) {
        for (augment::AugmentKind aug : config.augmentations) {
            bool baseline_added = false;
            auto add = [&](noise::Kind kind, double strength) {
                const CellKey key = normalize_cell({cls, aug, kind, strength});
                if (key.noise_kind == noise::Kind::kNone) {
                    if (baseline_added) return;
                    baseline_added = true;
                }
                tasks.push_back(key);
            };
            for (double s : config.linear_strengths) add(noise::Kind::kLinear, s);
            for (double s : config.awgn_strengths) add(noise::Kind::kAwgn, s);
        }
    }

    std::vector<CellResult> task_results(tasks.size());
    std::vector<std::string> task_errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                task_results[i] = run_cell(config, tasks[i]);
            } catch (const std::exception& e) {
                task_errors[i] = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
        pool.reserve(n);
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    GridRunResult run;
    run.training_runs = static_cast<int>(tasks.size());
    std::map<std::string, const CellResult*> by_identity;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string identity = cell_identity(tasks[i]);
        if (!task_errors[i].empty()) {
            run.failures.push_back({identity, task_errors[i]});
        } else {
            by_identity.emplace(identity, &task_results[i]);
        }
    }

    // expand to display order (classifier, augmentation, kind, strength)
    for (Classifier cls : config.classifiers) {
        for (augment::AugmentKind aug : config.augmentations) {
            for (noise::Kind kind : {noise::Kind::kLinear, noise::Kind::kAwgn}) {
                const auto& strengths = kind == noise::Kind::kLinear ? config.linear_strengths
                                                                     : config.awgn_strengths;
                for (double s : strengths) {
                    const CellKey display{cls, aug, kind, s};
                    const auto it = by_identity.find(cell_identity(display));
                    if (it == by_identity.end()) continue;  // failed cell
                    CellResult r = *it->second;
                    r.noise_kind = noise::kind_name(kind);  // baseline shown under both kinds
                    r.strength = s;
                    run.results.push_back(std::move(r));
                }
            }
        }
    }

    std::uint64_t reference = 0;
    bool first = true;
    for (const auto& r : run.results) {
        if (first) {
            reference = r.test_checksum;
            first = false;
        } else if (r.test_checksum != reference) {
            run.test_checksum_consistent = false;
        }
    }
    return run;
}

// ---- config <-> json ----

namespace {

json config_to_json(const GridConfig& config) {
    json j;
    if (config.dataset.use_synth) {
        j["dataset"] = {{"kind", "synth"},
                        {"classes", config.dataset.synth.classes},
                        {"records_per_class", config.dataset.synth.records_per_class},
                        {"record_length", config.dataset.synth.record_length},
                        {"seed", config.dataset.synth.seed}};
    } else {
        j["dataset"] = {{"kind", "manifest"}, {"path", config.dataset.manifest_path}};
    }
    j["split"] = {{"train_fraction", config.split.train_fraction},
                  {"val_fraction", config.split.val_fraction},
                  {"test_fraction", config.split.test_fraction},
                  {"seed", config.split.seed}};
    j["window"] = {{"length", config.window_length}, {"stride", config.window_stride}};
    j["classifiers"] = json::array();
    for (auto c : config.classifiers) j["classifiers"].push_back(classifier_name(c));
    j["augmentations"] = json::array();
    for (auto a : config.augmentations) j["augmentations"].push_back(augment::augment_name(a));
    j["noise"] = {{"linear_strengths", config.linear_strengths},
                  {"awgn_strengths", config.awgn_strengths}};
    j["linear_noise"] = {{"x_scale", config.linear_x_scale}};
    json target;
    if (config.gmm_target_per_class > 0) {
        target = config.gmm_target_per_class;
    } else {
        target = "match-majority";
    }
    j["augment"] = {{"gmm_components", config.gmm_components},
                    {"target_per_class", target},
                    {"gmm_max_iters", config.gmm_max_iters},
                    {"gmm_tol", config.gmm_tol}};
    j["train"] = {{"epochs", config.train.epochs},
                  {"batch_size", config.train.batch_size},
                  {"learning_rate", config.train.learning_rate},
                  {"beta1", config.train.beta1},
                  {"beta2", config.train.beta2},
                  {"epsilon", config.train.epsilon},
                  {"early_stop_patience", config.train.early_stop_patience}};
    j["metric"] = config.metric == metrics::Averaging::kMacro ? "macro" : "weighted";
    j["global_seed"] = config.global_seed;
    j["output_dir"] = config.output_dir;
    return j;
}

GridConfig config_from_json(const json& root) {
    const json& j = root.contains("config") ? root.at("config") : root;
    GridConfig config;
    try {
        if (j.contains("dataset")) {
            const auto& d = j.at("dataset");
            const std::string kind = d.value("kind", "synth");
            if (kind == "synth") {
                config.dataset.use_synth = true;
                config.dataset.synth.classes = d.value("classes", config.dataset.synth.classes);
                config.dataset.synth.records_per_class =
                    d.value("records_per_class", config.dataset.synth.records_per_class);
                config.dataset.synth.record_length =
                    d.value("record_length", config.dataset.synth.record_length);
                config.dataset.synth.seed = d.value("seed", config.dataset.synth.seed);
            } else if (kind == "manifest") {
                config.dataset.use_synth = false;
                config.dataset.manifest_path = d.value("path", "");
            } else {
                throw ConfigError("config: dataset.kind must be 'synth' or 'manifest'");
            }
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            config.split.train_fraction = s.value("train_fraction", config.split.train_fraction);
            config.split.val_fraction = s.value("val_fraction", config.split.val_fraction);
            config.split.test_fraction = s.value("test_fraction", config.split.test_fraction);
            config.split.seed = s.value("seed", config.split.seed);
        }
        if (j.contains("window")) {
            config.window_length = j.at("window").value("length", config.window_length);
            config.window_stride = j.at("window").value("stride", config.window_stride);
        }
        if (j.contains("classifiers")) {
            config.classifiers.clear();
            for (const auto& c : j.at("classifiers")) {
                config.classifiers.push_back(classifier_from_name(c.get<std::string>()));
            }
        }
        if (j.contains("augmentations")) {
            config.augmentations.clear();
            for (const auto& a : j.at("augmentations")) {
                config.augmentations.push_back(augment::augment_from_name(a.get<std::string>()));
            }
        }
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            if (n.contains("linear_strengths")) {
                config.linear_strengths = n.at("linear_strengths").get<std::vector<double>>();
            }
            if (n.contains("awgn_strengths")) {
                config.awgn_strengths = n.at("awgn_strengths").get<std::vector<double>>();
            }
        }
        if (j.contains("linear_noise")) {
            config.linear_x_scale = j.at("linear_noise").value("x_scale", config.linear_x_scale);
        }
        if (j.contains("augment")) {
            const auto& a = j.at("augment");
            config.gmm_components = a.value("gmm_components", config.gmm_components);
            if (a.contains("target_per_class")) {
                const auto& t = a.at("target_per_class");
                if (t.is_string()) {
                    if (t.get<std::string>() != "match-majority") {
                        throw ConfigError(
                            "config: augment.target_per_class must be an integer or "
                            "'match-majority'");
                    }
                    config.gmm_target_per_class = 0;
                } else {
                    config.gmm_target_per_class = t.get<int>();
                }
            }
            config.gmm_max_iters = a.value("gmm_max_iters", config.gmm_max_iters);
            config.gmm_tol = a.value("gmm_tol", config.gmm_tol);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            config.train.epochs = t.value("epochs", config.train.epochs);
            config.train.batch_size = t.value("batch_size", config.train.batch_size);
            config.train.learning_rate = t.value("learning_rate", config.train.learning_rate);
            config.train.beta1 = t.value("beta1", config.train.beta1);
            config.train.beta2 = t.value("beta2", config.train.beta2);
            config.train.epsilon = t.value("epsilon", config.train.epsilon);
            config.train.early_stop_patience =
                t.value("early_stop_patience", config.train.early_stop_patience);
        }
        if (j.contains("metric")) {
            const std::string m = j.at("metric").get<std::string>();
            if (m == "macro") {
                config.metric = metrics::Averaging::kMacro;
            } else if (m == "weighted") {
                config.metric = metrics::Averaging::kWeighted;
            } else {
                throw ConfigError("config: metric must be 'macro' or 'weighted'");
            }
        }
        config.global_seed = j.value("global_seed", config.global_seed);
        config.output_dir = j.value("output_dir", config.output_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed value (") + e.what() + ")");
    }
    validate_config(config);
    return config;
}

}  // namespace

GridConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
    }
    return config_from_json(j);
}

GridConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str());
}

std::string config_to_json_text(const GridConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

// ---- report files ----

void write_report(const GridRunResult& run, const GridConfig& config,
                  const std::string& output_dir) {
    if (run.results.empty() && run.failures.empty()) {
        throw std::invalid_argument("report: no results to write");
    }
    fs::create_directories(output_dir);
    const fs::path dir(output_dir);

    // table.csv: one row per (classifier, augmentation), one column per
    // strength under each noise kind
    {
        std::ofstream out(dir / "table.csv");
        if (!out) throw std::runtime_error("cannot write table.csv");
        out << "classifier,aug";
        for (double s : config.linear_strengths) out << ",linear_" << format_strength(s);
        for (double s : config.awgn_strengths) out << ",awgn_" << format_strength(s);
        out << '\n';
        for (Classifier cls : config.classifiers) {
            for (augment::AugmentKind aug : config.augmentations) {
                out << classifier_name(cls) << ',' << augment::augment_name(aug);
                auto emit = [&](noise::Kind kind, double s) {
                    for (const auto& r : run.results) {
                        if (r.classifier == classifier_name(cls) &&
                            r.augmentation == augment::augment_name(aug) &&
                            r.noise_kind == noise::kind_name(kind) && r.strength == s) {
                            out << ',' << metrics::format_percent(r.f1);
                            return;
                        }
                    }
                    out << ",";  // failed cell leaves an empty column
                };
                for (double s : config.linear_strengths) emit(noise::Kind::kLinear, s);
                for (double s : config.awgn_strengths) emit(noise::Kind::kAwgn, s);
                out << '\n';
            }
        }
    }

    // curves.csv: long format for external plotting
    {
        std::ofstream out(dir / "curves.csv");
        if (!out) throw std::runtime_error("cannot write curves.csv");
        out << "classifier,augmentation,noise_kind,strength,f1\n";
        for (const auto& r : run.results) {
            out << r.classifier << ',' << r.augmentation << ',' << r.noise_kind << ','
                << format_strength(r.strength) << ',' << metrics::format_percent(r.f1) << '\n';
        }
    }

    // run.json: resolved config, protocol decisions, per-cell metadata, trends
    {
        json j;
        j["config"] = config_to_json(config);
        j["protocol"] = {
            {"noise_injection", "raw amplitude units, before standardization"},
            {"corruption", "once per run, training split only"},
            {"augmentation_order", "after noise corruption, before standardization"},
            {"evaluation", "clean test split"},
        };
        json label_map = json::array();
        try {
            const data::Dataset dataset = load_configured_dataset(config);
            for (std::size_t i = 0; i < dataset.class_names.size(); ++i) {
                label_map.push_back({{"index", i}, {"name", dataset.class_names[i]}});
            }
        } catch (const std::exception&) {
            // dataset unavailable (e.g. every cell failed to load); leave the map empty
        }
        j["label_map"] = label_map;
        j["training_runs"] = run.training_runs;
        j["test_checksum_consistent"] = run.test_checksum_consistent;

        json results = json::array();
        for (const auto& r : run.results) {
            json history = json::array();
            for (const auto& e : r.history) {
                history.push_back({{"train_loss", e.train_loss}, {"val_macro_f1", e.val_macro_f1}});
            }
            char checksum_hex[24];
            std::snprintf(checksum_hex, sizeof(checksum_hex), "%016llx",
                          static_cast<unsigned long long>(r.test_checksum));
            results.push_back({{"classifier", r.classifier},
                               {"augmentation", r.augmentation},
                               {"noise_kind", r.noise_kind},
                               {"strength", r.strength},
                               {"f1", r.f1},
                               {"f1_percent", metrics::format_percent(r.f1)},
                               {"epochs_run", r.epochs_run},
                               {"best_epoch", r.best_epoch},
                               {"wall_seconds", r.wall_seconds},
                               {"cell_seed", r.cell_seed},
                               {"test_checksum", checksum_hex},
                               {"history", history},
                               {"warnings", r.warnings}});
        }
        j["results"] = results;

        json failures = json::array();
        for (const auto& f : run.failures) {
            failures.push_back({{"cell", f.identity}, {"error", f.message}});
        }
        j["failures"] = failures;

        // F1-vs-strength curves per (classifier, augmentation, kind), with the
        // drop relative to the clean baseline: the qualitative trend report
        json trends = json::object();
        for (const auto& r : run.results) {
            const std::string key = r.classifier + "|" + r.augmentation + "|" + r.noise_kind;
            double baseline = r.f1;
            for (const auto& b : run.results) {
                if (b.classifier == r.classifier && b.augmentation == r.augmentation &&
                    b.noise_kind == r.noise_kind && b.strength == 0.0) {
                    baseline = b.f1;
                    break;
                }
            }
            trends[key].push_back({{"strength", r.strength},
                                   {"f1_percent", metrics::format_percent(r.f1)},
                                   {"delta_vs_clean_percent",
                                    metrics::format_percent(r.f1 - baseline)}});
        }
        j["trends"] = trends;

        std::ofstream out(dir / "run.json");
        if (!out) throw std::runtime_error("cannot write run.json");
        out << j.dump(2) << '\n';
    }
}

void rerender_report(const std::string& run_json_path, const std::string& output_dir) {
    std::ifstream in(run_json_path);
    if (!in) throw std::runtime_error("cannot open " + run_json_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("bad run.json: ") + e.what());
    }
    const GridConfig config = config_from_json(j);
    GridRunResult run;
    run.test_checksum_consistent = j.value("test_checksum_consistent", true);
    run.training_runs = j.value("training_runs", 0);
    for (const auto& r : j.at("results")) {
        CellResult cell;
        cell.classifier = r.at("classifier").get<std::string>();
        cell.augmentation = r.at("augmentation").get<std::string>();
        cell.noise_kind = r.at("noise_kind").get<std::string>();
        cell.strength = r.at("strength").get<double>();
        cell.f1 = r.at("f1").get<double>();
        cell.epochs_run = r.value("epochs_run", 0);
        cell.best_epoch = r.value("best_epoch", 0);
        cell.wall_seconds = r.value("wall_seconds", 0.0);
        cell.cell_seed = r.value("cell_seed", std::uint64_t{0});
        run.results.push_back(std::move(cell));
    }
    if (j.contains("failures")) {
        for (const auto& f : j.at("failures")) {
            run.failures.push_back({f.value("cell", ""), f.value("error", "")});
        }
    }
    write_report(run, config, output_dir);
}

}  // namespace noisebench::experiment
