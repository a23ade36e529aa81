// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run via `ctest -R acceptance` or directly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "noisebench/augment.hpp"
#include "noisebench/dataset.hpp"
#include "noisebench/experiment.hpp"
#include "noisebench/metrics.hpp"
#include "noisebench/nn.hpp"
#include "noisebench/noise.hpp"
#include "noisebench/rng.hpp"

using namespace noisebench;
using Clock = std::chrono::steady_clock;

namespace {

struct Harness {
    int failures = 0;

    void run(const std::string& name, const std::function<std::string()>& criterion) {
        try {
            const std::string detail = criterion();
            std::printf("PASS  %-28s %s\n", name.c_str(), detail.c_str());
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL  %-28s %s\n", name.c_str(), e.what());
        }
        std::fflush(stdout);
    }
};

void require(bool ok, const std::string& message) {
    if (!ok) throw std::runtime_error(message);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

nn::FeatureMap random_map(int channels, int length, Rng& rng) {
    nn::FeatureMap fm(channels, length);
    for (double& v : fm.values) v = rng.next_gaussian();
    return fm;
}

// max relative gradient error over `trials` random shapes for one model family
double check_family(const std::function<std::vector<nn::LayerSpec>(Rng&)>& make_arch,
                    const std::function<std::pair<int, int>(Rng&)>& make_input_shape,
                    int trials, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const auto [channels, length] = make_input_shape(rng);
        auto model = nn::Model::build(make_arch(rng), channels, length, rng.next_u64());
        std::vector<nn::FeatureMap> batch;
        std::vector<int> labels;
        for (int i = 0; i < 2; ++i) {
            batch.push_back(random_map(channels, length, rng));
            labels.push_back(static_cast<int>(rng.next_below(model.output_size())));
        }
        worst = std::max(worst, nn::gradient_check(model, batch, labels, 1e-5));
    }
    return worst;
}

std::string criterion_gradient_fidelity() {
    const auto t0 = Clock::now();
    double worst = 0.0;

    // conv1d
    worst = std::max(worst, check_family(
        [](Rng& rng) -> std::vector<nn::LayerSpec> {
            const int k = 1 + static_cast<int>(rng.next_below(7));
            const int co = 1 + static_cast<int>(rng.next_below(4));
            const int stride = 1 + static_cast<int>(rng.next_below(2));
            const auto pad = rng.next_below(2) == 0 ? nn::Padding::kSame : nn::Padding::kValid;
            return {{nn::LayerKind::kConv1d, k, co, stride, pad},
                    {nn::LayerKind::kRelu},
                    {nn::LayerKind::kDense, 0, 3}};
        },
        [](Rng& rng) {
            return std::pair<int, int>(1 + static_cast<int>(rng.next_below(3)),
                                       10 + static_cast<int>(rng.next_below(10)));
        },
        20, 901));

    // sepconv1d
    worst = std::max(worst, check_family(
        [](Rng& rng) -> std::vector<nn::LayerSpec> {
            const int k = 1 + static_cast<int>(rng.next_below(6));
            const int co = 1 + static_cast<int>(rng.next_below(4));
            const int stride = 1 + static_cast<int>(rng.next_below(2));
            const auto pad = rng.next_below(2) == 0 ? nn::Padding::kSame : nn::Padding::kValid;
            return {{nn::LayerKind::kSepConv1d, k, co, stride, pad},
                    {nn::LayerKind::kRelu},
                    {nn::LayerKind::kDense, 0, 2}};
        },
        [](Rng& rng) {
            return std::pair<int, int>(1 + static_cast<int>(rng.next_below(3)),
                                       9 + static_cast<int>(rng.next_below(12)));
        },
        20, 902));

    // maxpool (through a conv so pooled gradients reach parameters)
    worst = std::max(worst, check_family(
        [](Rng& rng) -> std::vector<nn::LayerSpec> {
            const int pool = 2 + static_cast<int>(rng.next_below(2));
            return {{nn::LayerKind::kConv1d, 3, 2, 1, nn::Padding::kSame},
                    {nn::LayerKind::kMaxPool1d, pool},
                    {nn::LayerKind::kDense, 0, 3}};
        },
        [](Rng& rng) {
            return std::pair<int, int>(1 + static_cast<int>(rng.next_below(2)),
                                       12 + static_cast<int>(rng.next_below(10)));
        },
        20, 903));

    // global average pool
    worst = std::max(worst, check_family(
        [](Rng& rng) -> std::vector<nn::LayerSpec> {
            const int co = 2 + static_cast<int>(rng.next_below(3));
            return {{nn::LayerKind::kConv1d, 3, co, 1, nn::Padding::kSame},
                    {nn::LayerKind::kGlobalAvgPool},
                    {nn::LayerKind::kDense, 0, 2}};
        },
        [](Rng& rng) {
            return std::pair<int, int>(1, 8 + static_cast<int>(rng.next_below(16)));
        },
        20, 904));

    // dense + softmax-CE head
    worst = std::max(worst, check_family(
        [](Rng& rng) -> std::vector<nn::LayerSpec> {
            const int hidden = 2 + static_cast<int>(rng.next_below(8));
            const int classes = 2 + static_cast<int>(rng.next_below(4));
            return {{nn::LayerKind::kDense, 0, hidden},
                    {nn::LayerKind::kRelu},
                    {nn::LayerKind::kDense, 0, classes}};
        },
        [](Rng& rng) {
            return std::pair<int, int>(1, 4 + static_cast<int>(rng.next_below(12)));
        },
        20, 905));

    const double elapsed = seconds_since(t0);
    require(worst < 1e-4, format("max relative error %.3e >= 1e-4", worst));
    require(elapsed < 60.0, format("suite took %.1f s >= 60 s", elapsed));
    return format("max rel err %.3e over 5 layer kinds x 20 shapes in %.1f s", worst, elapsed);
}

std::string criterion_separable_equivalence() {
    Rng rng(777);
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const int ci = 1 + static_cast<int>(rng.next_below(6));
        const int co = 1 + static_cast<int>(rng.next_below(6));
        const int k = 1 + static_cast<int>(rng.next_below(8));
        const int len = k + static_cast<int>(rng.next_below(24));
        const int stride = 1 + static_cast<int>(rng.next_below(2));
        const auto pad = rng.next_below(2) == 0 ? nn::Padding::kSame : nn::Padding::kValid;

        nn::FeatureMap in(ci, len);
        for (double& v : in.values) v = 2.0 * rng.next_double() - 1.0;
        std::vector<double> dw(static_cast<std::size_t>(ci) * k), pw(static_cast<std::size_t>(co) * ci),
            pwb(co), dwb(ci, 0.0);
        for (double& v : dw) v = 2.0 * rng.next_double() - 1.0;
        for (double& v : pw) v = 2.0 * rng.next_double() - 1.0;
        for (double& v : pwb) v = 2.0 * rng.next_double() - 1.0;

        std::vector<double> composed(static_cast<std::size_t>(co) * ci * k);
        for (int o = 0; o < co; ++o) {
            for (int c = 0; c < ci; ++c) {
                for (int j = 0; j < k; ++j) {
                    composed[(static_cast<std::size_t>(o) * ci + c) * k + j] =
                        pw[static_cast<std::size_t>(o) * ci + c] *
                        dw[static_cast<std::size_t>(c) * k + j];
                }
            }
        }
        const auto sep = nn::sepconv1d_forward(in, dw, dwb, pw, pwb, co, k, stride, pad);
        const auto conv = nn::conv1d_forward(in, composed, pwb, co, k, stride, pad);
        for (std::size_t i = 0; i < sep.values.size(); ++i) {
            worst = std::max(worst, std::abs(sep.values[i] - conv.values[i]));
        }
    }
    require(worst < 1e-12, format("max abs diff %.3e >= 1e-12", worst));

    require(nn::conv1d_param_count(32, 64, 16) == 32832,
            "conv1d(32,64,16) parameter count != 32832");
    require(nn::sepconv1d_param_count(32, 64, 16) == 2656,
            "sepconv1d(32,64,16) parameter count != 2656");
    for (int k : {4, 8, 16, 31}) {
        for (int co : {4, 8, 16, 32, 64}) {
            for (int ci : {1, 2, 4, 16, 32, 64}) {
                require(nn::sepconv1d_param_count(ci, co, k) < nn::conv1d_param_count(ci, co, k),
                        format("no separable economy at ci=%d co=%d k=%d", ci, co, k));
            }
        }
    }
    return format("factorization diff %.3e; counts 32832 vs 2656; economy on full grid", worst);
}

std::string criterion_noise_statistics() {
    const std::vector<double> zeros(100000, 0.0);
    std::string sigma_report;
    for (double sigma : {20.0, 40.0, 60.0, 80.0}) {
        const auto noisy = noise::apply_awgn(zeros, sigma, 1234 + static_cast<int>(sigma));
        const double s = data::std_of(noisy);
        require(std::abs(s - sigma) / sigma < 0.01,
                format("awgn sigma=%g produced std %.3f (>1%% off)", sigma, s));
        sigma_report += format("%.0f:%.2f ", sigma, s);
    }
    for (double slope : {0.2, 0.4, 0.6, 0.8}) {
        const auto ramp = noise::apply_linear(zeros, slope);
        for (std::size_t i = 0; i < ramp.size(); ++i) {
            if (ramp[i] != slope * static_cast<double>(i)) {
                throw std::runtime_error(format("linear a=%g not exact at i=%zu", slope, i));
            }
        }
    }
    Rng rng(55);
    std::vector<double> signal(4096);
    for (double& v : signal) v = 100.0 * rng.next_gaussian();
    require(noise::apply_awgn(signal, 0.0, 9) == signal, "awgn sigma=0 not bit-identical");
    require(noise::apply_linear(signal, 0.0) == signal, "linear a=0 not bit-identical");
    return "awgn std " + sigma_report + "; ramps exact; zero strength bit-identical";
}

std::string criterion_em_correctness() {
    const auto t0 = Clock::now();

    // 2000 scalars, half N(0,1), half N(10,1)
    std::vector<std::vector<double>> vectors;
    Rng rng(246810);
    for (int i = 0; i < 1000; ++i) vectors.push_back({rng.next_gaussian()});
    for (int i = 0; i < 1000; ++i) vectors.push_back({10.0 + rng.next_gaussian()});
    const auto fit = augment::gmm_fit(vectors, 2, 200, 1e-8, 13);

    for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
        require(fit.log_likelihood_trace[i] >= fit.log_likelihood_trace[i - 1] - 1e-9,
                format("log-likelihood decreased at iteration %zu", i));
    }
    const int low = fit.model.means[0][0] < fit.model.means[1][0] ? 0 : 1;
    const double m_low = fit.model.means[low][0];
    const double m_high = fit.model.means[1 - low][0];
    const double w_low = fit.model.weights[low];
    require(std::abs(m_low - 0.0) <= 0.2, format("low mean %.3f off by > 0.2", m_low));
    require(std::abs(m_high - 10.0) <= 0.2, format("high mean %.3f off by > 0.2", m_high));
    require(std::abs(w_low - 0.5) <= 0.05, format("weight %.3f off by > 0.05", w_low));

    // monotonicity across a spread of random fits
    Rng shapes(1357);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 40 + static_cast<int>(shapes.next_below(80));
        const int d = 1 + static_cast<int>(shapes.next_below(8));
        const int k = 1 + static_cast<int>(shapes.next_below(3));
        std::vector<std::vector<double>> xs;
        for (int i = 0; i < n; ++i) {
            std::vector<double> v(d);
            for (double& x : v) x = shapes.next_gaussian() * (1.0 + trial % 3);
            xs.push_back(std::move(v));
        }
        const auto f = augment::gmm_fit(xs, k, 50, 1e-9, trial);
        for (std::size_t i = 1; i < f.log_likelihood_trace.size(); ++i) {
            require(f.log_likelihood_trace[i] >= f.log_likelihood_trace[i - 1] - 1e-9,
                    "log-likelihood decreased on a random fit");
        }
    }

    const double elapsed = seconds_since(t0);
    require(elapsed < 10.0, format("EM suite took %.1f s >= 10 s", elapsed));
    return format("means %.3f/%.3f weight %.3f, traces monotone, %.2f s", m_low, m_high, w_low,
                  elapsed);
}

std::string criterion_metric_oracle() {
    Rng rng(7001);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(5));
        const int n = 1 + static_cast<int>(rng.next_below(80));
        std::vector<int> y_true, y_pred;
        for (int i = 0; i < n; ++i) {
            y_true.push_back(static_cast<int>(rng.next_below(k)));
            y_pred.push_back(static_cast<int>(rng.next_below(k)));
        }
        const double ours = metrics::macro_f1(metrics::confusion(y_true, y_pred, k)).macro_f1;

        double f1_sum = 0.0;
        int supported = 0;
        for (int c = 0; c < k; ++c) {
            long tp = 0, fp = 0, fn = 0, support = 0;
            for (std::size_t i = 0; i < y_true.size(); ++i) {
                if (y_true[i] == c) ++support;
                if (y_true[i] == c && y_pred[i] == c) ++tp;
                if (y_true[i] != c && y_pred[i] == c) ++fp;
                if (y_true[i] == c && y_pred[i] != c) ++fn;
            }
            if (support == 0) continue;
            ++supported;
            const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
            const double r = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
            f1_sum += p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
        }
        const double oracle = supported > 0 ? f1_sum / supported : 0.0;
        worst = std::max(worst, std::abs(ours - oracle));
    }
    require(worst < 1e-12, format("brute-force disagreement %.3e >= 1e-12", worst));

    metrics::ConfusionMatrix cm;
    cm.num_classes = 2;
    cm.counts = {8, 2, 3, 7};
    const double macro = metrics::macro_f1(cm).macro_f1;
    require(std::abs(macro - 299.0 / 399.0) < 1e-12,
            format("worked matrix macro %.6f != 299/399", macro));
    require(metrics::format_percent(macro) == "74.94", "worked matrix does not render as 74.94");
    return format("200 instances to 1e-12; worked matrix macro %.4f", macro);
}

// shared by the grid and protocol criteria so the 36 runs execute once
struct GridOutcome {
    experiment::GridConfig config;
    experiment::GridRunResult run;
    double wall_seconds = 0.0;
    std::string table_csv;
    bool ready = false;
};

GridOutcome& grid_outcome() {
    static GridOutcome outcome;
    if (!outcome.ready) {
        outcome.config = experiment::GridConfig{};  // defaults = the paper-shaped desk grid
        outcome.config.output_dir = (std::filesystem::temp_directory_path() /
                                     "noisebench_acceptance_grid").string();
        const auto t0 = Clock::now();
        const unsigned hw = std::thread::hardware_concurrency();
        outcome.run = experiment::run_grid(outcome.config, hw > 1 ? static_cast<int>(hw) : 1);
        outcome.wall_seconds = seconds_since(t0);
        experiment::write_report(outcome.run, outcome.config, outcome.config.output_dir);
        std::ifstream table(std::filesystem::path(outcome.config.output_dir) / "table.csv");
        outcome.table_csv.assign(std::istreambuf_iterator<char>(table), {});
        outcome.ready = true;
    }
    return outcome;
}

std::string criterion_desk_scale_grid() {
    auto& outcome = grid_outcome();
    require(outcome.run.failures.empty(),
            format("%zu grid cells failed", outcome.run.failures.size()));
    require(outcome.run.training_runs == 36,
            format("%d training runs != 36", outcome.run.training_runs));
    require(outcome.wall_seconds <= 600.0,
            format("grid took %.0f s > 600 s", outcome.wall_seconds));

    double min_baseline = 1.0;
    for (const auto& r : outcome.run.results) {
        if (r.strength == 0.0) min_baseline = std::min(min_baseline, r.f1);
    }
    require(min_baseline >= 0.90,
            format("clean baseline macro F1 %.4f < 0.90", min_baseline));

    // Table-1 shape: 4 data rows, 10 F1 columns, strength-0 duplicated per kind
    std::stringstream table(outcome.table_csv);
    std::string line;
    require(static_cast<bool>(std::getline(table, line)), "table.csv missing header");
    int header_cols = 1;
    for (char c : line) header_cols += c == ',';
    require(header_cols == 12, format("table has %d columns != 12 (2 + 10 F1)", header_cols));
    int rows = 0;
    while (std::getline(table, line)) {
        if (line.empty()) continue;
        ++rows;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        require(fields.size() == 12, "short table row");
        require(fields[2] == fields[7],
                format("row %d: linear_0 (%s) != awgn_0 (%s)", rows, fields[2].c_str(),
                       fields[7].c_str()));
    }
    require(rows == 4, format("table has %d data rows != 4", rows));
    return format("36 runs in %.0f s, min clean baseline F1 %.4f, 4x10 table with shared 0 column",
                  outcome.wall_seconds, min_baseline);
}

std::string criterion_protocol_invariants() {
    auto& outcome = grid_outcome();
    require(outcome.run.test_checksum_consistent, "test-set checksum differs across cells");
    require(!outcome.run.results.empty(), "no grid results");

    // rerunning a cell in isolation reproduces its grid value bit-exactly
    const auto& sample = outcome.run.results[outcome.run.results.size() / 2];
    experiment::CellKey key;
    key.classifier = experiment::classifier_from_name(sample.classifier);
    key.augmentation = augment::augment_from_name(sample.augmentation);
    key.noise_kind = noise::kind_from_name(sample.noise_kind);
    key.strength = sample.strength;
    const auto lone = experiment::run_cell(outcome.config, key);
    require(lone.f1 == sample.f1,
            format("isolated rerun F1 %.6f != grid %.6f", lone.f1, sample.f1));
    require(lone.test_checksum == sample.test_checksum, "isolated rerun checksum differs");
    return format("checksum %016llx across %zu cells; isolated rerun of %s|%s|%s|%g bit-exact",
                  static_cast<unsigned long long>(sample.test_checksum),
                  outcome.run.results.size(), sample.classifier.c_str(),
                  sample.augmentation.c_str(), sample.noise_kind.c_str(), sample.strength);
}

std::string criterion_trend_report() {
    auto& outcome = grid_outcome();
    const auto run_json = std::filesystem::path(outcome.config.output_dir) / "run.json";
    std::ifstream in(run_json);
    require(in.good(), "run.json missing");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    require(text.find("\"trends\"") != std::string::npos, "run.json lacks a trends section");
    require(text.find("delta_vs_clean_percent") != std::string::npos,
            "trend entries lack deltas vs the clean baseline");
    require(text.find("\"history\"") != std::string::npos, "per-cell histories missing");

    // non-gating: surface the F1-vs-strength summary for inspection
    std::string summary = "curves emitted for";
    int curves = 0;
    for (const auto& r : outcome.run.results) {
        if (r.strength == 0.0) ++curves;
    }
    return format("trends + per-cell histories in run.json (%d curves); not asserted", curves);
}

}  // namespace

int main() {
    Harness harness;
    harness.run("gradient-fidelity", criterion_gradient_fidelity);
    harness.run("separable-equivalence", criterion_separable_equivalence);
    harness.run("noise-statistics", criterion_noise_statistics);
    harness.run("em-correctness", criterion_em_correctness);
    harness.run("metric-oracle", criterion_metric_oracle);
    harness.run("desk-scale-grid", criterion_desk_scale_grid);
    harness.run("protocol-invariants", criterion_protocol_invariants);
    harness.run("trend-report", criterion_trend_report);

    if (harness.failures > 0) {
        std::printf("%d criterion(s) failed\n", harness.failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
