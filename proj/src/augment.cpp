#include "noisebench/augment.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "noisebench/rng.hpp"

namespace noisebench::augment {

std::string augment_name(AugmentKind kind) {
    switch (kind) {
        case AugmentKind::kOversample: return "OVERSAMPLE";
        case AugmentKind::kGmm: return "GMM";
        default: return "NONE";
    }
}

AugmentKind augment_from_name(const std::string& name) {
    if (name == "NONE" || name == "none") return AugmentKind::kNone;
    if (name == "OVERSAMPLE" || name == "oversample") return AugmentKind::kOversample;
    if (name == "GMM" || name == "gmm") return AugmentKind::kGmm;
    throw std::invalid_argument("unknown augmentation '" + name + "'");
}

namespace {

std::map<int, std::vector<std::size_t>> indices_by_class(const std::vector<data::Window>& windows) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        by_class[windows[i].label.index].push_back(i);
    }
    return by_class;
}

}  // namespace

std::vector<data::Window> oversample(const std::vector<data::Window>& windows,
                                     std::uint64_t seed) {
    if (windows.empty()) throw std::invalid_argument("oversample: empty input");
    const auto by_class = indices_by_class(windows);
    std::size_t majority = 0;
    for (const auto& [cls, idx] : by_class) majority = std::max(majority, idx.size());

    std::vector<data::Window> out = windows;
    for (const auto& [cls, idx] : by_class) {
        Rng rng(seed_combine(seed, static_cast<std::uint64_t>(cls)));
        for (std::size_t need = majority - idx.size(); need > 0; --need) {
            out.push_back(windows[idx[rng.next_below(idx.size())]]);
        }
    }
    return out;
}

GmmFit gmm_fit(const std::vector<std::vector<double>>& vectors, int components,
               int max_iters, double tol, std::uint64_t seed) {
    const std::size_t n = vectors.size();
    if (components < 1) throw std::invalid_argument("gmm_fit: components must be >= 1");
    if (n < static_cast<std::size_t>(components)) {
        throw std::invalid_argument("gmm_fit: " + std::to_string(n) + " vectors for " +
                                    std::to_string(components) + " components");
    }
    const std::size_t d = vectors[0].size();
    if (d == 0) throw std::invalid_argument("gmm_fit: zero-dimensional vectors");
    for (const auto& v : vectors) {
        if (v.size() != d) throw std::invalid_argument("gmm_fit: inconsistent vector dimensions");
        for (double x : v) {
            if (!std::isfinite(x)) throw std::invalid_argument("gmm_fit: non-finite input value");
        }
    }

    // per-dimension data variance drives the variance floor
    std::vector<double> data_mean(d, 0.0), data_var(d, 0.0), floor(d, 0.0);
    for (const auto& v : vectors) {
        for (std::size_t j = 0; j < d; ++j) data_mean[j] += v[j];
    }
    for (std::size_t j = 0; j < d; ++j) data_mean[j] /= static_cast<double>(n);
    for (const auto& v : vectors) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dx = v[j] - data_mean[j];
            data_var[j] += dx * dx;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        data_var[j] /= static_cast<double>(n);
        floor[j] = 1e-6 * (data_var[j] + 1e-12);
    }

    const int k = components;
    GmmModel model;
    model.num_components = k;
    model.dim = static_cast<int>(d);
    model.weights.assign(k, 1.0 / k);
    model.means.assign(k, std::vector<double>(d, 0.0));
    model.variances.assign(k, data_var);
    for (auto& var : model.variances) {
        for (std::size_t j = 0; j < d; ++j) var[j] = std::max(var[j], floor[j]);
    }

    // k-means++-style seeding: first mean uniform, the rest proportional to
    // the squared distance to the nearest mean chosen so far
    Rng rng(seed);
    std::vector<double> min_dist2(n, std::numeric_limits<double>::max());
    std::size_t pick = static_cast<std::size_t>(rng.next_below(n));
    for (int c = 0; c < k; ++c) {
        model.means[c] = vectors[pick];
        if (c + 1 == k) break;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dist2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double dx = vectors[i][j] - vectors[pick][j];
                dist2 += dx * dx;
            }
            min_dist2[i] = std::min(min_dist2[i], dist2);
            total += min_dist2[i];
        }
        if (total <= 0.0) {
            pick = static_cast<std::size_t>(rng.next_below(n));
            continue;
        }
        double target = rng.next_double() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= min_dist2[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
    }

    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    std::vector<std::vector<double>> resp(n, std::vector<double>(k, 0.0));
    std::vector<std::vector<double>> inv_var(k, std::vector<double>(d, 0.0));
    std::vector<double> log_norm(k, 0.0);
    std::vector<double> log_prob(k, 0.0);
    GmmFit fit;

    for (int iter = 0; iter < max_iters; ++iter) {
        // E-step with log-sum-exp; also accumulates the mean log-likelihood
        // of the current parameters
        for (int c = 0; c < k; ++c) {
            double log_det = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                log_det += std::log(model.variances[c][j]);
                inv_var[c][j] = 1.0 / model.variances[c][j];
            }
            log_norm[c] = std::log(model.weights[c]) -
                          0.5 * (static_cast<double>(d) * kLog2Pi + log_det);
        }
        double ll_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) {
                double quad = 0.0;
                const auto& mu = model.means[c];
                const auto& iv = inv_var[c];
                for (std::size_t j = 0; j < d; ++j) {
                    const double dx = vectors[i][j] - mu[j];
                    quad += dx * dx * iv[j];
                }
                log_prob[c] = log_norm[c] - 0.5 * quad;
            }
            const double max_lp = *std::max_element(log_prob.begin(), log_prob.end());
            double sum_exp = 0.0;
            for (int c = 0; c < k; ++c) sum_exp += std::exp(log_prob[c] - max_lp);
            const double lse = max_lp + std::log(sum_exp);
            ll_sum += lse;
            double row_sum = 0.0;
            for (int c = 0; c < k; ++c) {
                resp[i][c] = std::exp(log_prob[c] - lse);
                row_sum += resp[i][c];
            }
            assert(std::abs(row_sum - 1.0) < 1e-9);
            (void)row_sum;
        }
        const double mean_ll = ll_sum / static_cast<double>(n);
        fit.log_likelihood_trace.push_back(mean_ll);
        if (fit.log_likelihood_trace.size() > 1) {
            const double prev = fit.log_likelihood_trace[fit.log_likelihood_trace.size() - 2];
            if (std::abs(mean_ll - prev) < tol) break;
        }

        // M-step
        for (int c = 0; c < k; ++c) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp[i][c];
            const double safe_nk = std::max(nk, 1e-12);
            model.weights[c] = nk / static_cast<double>(n);
            auto& mu = model.means[c];
            std::fill(mu.begin(), mu.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) mu[j] += resp[i][c] * vectors[i][j];
            }
            for (std::size_t j = 0; j < d; ++j) mu[j] /= safe_nk;
            auto& var = model.variances[c];
            std::fill(var.begin(), var.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double dx = vectors[i][j] - mu[j];
                    var[j] += resp[i][c] * dx * dx;
                }
            }
            for (std::size_t j = 0; j < d; ++j) {
                var[j] = std::max(var[j] / safe_nk, floor[j]);
            }
        }
        double weight_sum = 0.0;
        for (double w : model.weights) weight_sum += w;
        for (double& w : model.weights) w /= weight_sum;
    }

    fit.model = std::move(model);
    return fit;
}

std::vector<std::vector<double>> gmm_sample(const GmmModel& model, int n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("gmm_sample: n must be >= 0");
    std::vector<std::vector<double>> out;
    out.reserve(n);
    Rng rng(seed);
    for (int s = 0; s < n; ++s) {
        const double u = rng.next_double();
        int component = model.num_components - 1;
        double cum = 0.0;
        for (int c = 0; c < model.num_components; ++c) {
            cum += model.weights[c];
            if (u < cum) {
                component = c;
                break;
            }
        }
        std::vector<double> v(model.dim);
        for (int j = 0; j < model.dim; ++j) {
            v[j] = model.means[component][j] +
                   std::sqrt(model.variances[component][j]) * rng.next_gaussian();
        }
        out.push_back(std::move(v));
    }
    return out;
}

AugmentResult augment_gmm(const std::vector<data::Window>& windows, const AugmentSpec& spec) {
    if (spec.kind != AugmentKind::kGmm) {
        throw std::invalid_argument("augment_gmm: spec kind must be GMM");
    }
    if (spec.gmm_components < 1) {
        throw std::invalid_argument("augment_gmm: gmm_components must be >= 1");
    }
    if (windows.empty()) throw std::invalid_argument("augment_gmm: empty input");

    const auto by_class = indices_by_class(windows);
    std::size_t majority = 0;
    for (const auto& [cls, idx] : by_class) majority = std::max(majority, idx.size());
    const std::size_t target = spec.target_per_class > 0
                                   ? static_cast<std::size_t>(spec.target_per_class)
                                   : majority;

    AugmentResult result;
    result.windows = windows;
    for (const auto& [cls, idx] : by_class) {
        int components = spec.gmm_components;
        if (idx.size() < static_cast<std::size_t>(components)) {
            components = static_cast<int>(idx.size());
            result.warnings.push_back("class " + std::to_string(cls) + " has only " +
                                      std::to_string(idx.size()) + " windows; fitting " +
                                      std::to_string(components) + " components instead of " +
                                      std::to_string(spec.gmm_components));
        }
        std::vector<std::vector<double>> vectors;
        vectors.reserve(idx.size());
        for (std::size_t i : idx) vectors.push_back(windows[i].values);

        auto fit = gmm_fit(vectors, components, spec.gmm_max_iters, spec.gmm_tol,
                           seed_combine(spec.seed, static_cast<std::uint64_t>(cls)));

        if (idx.size() < target) {
            const int need = static_cast<int>(target - idx.size());
            auto samples = gmm_sample(fit.model, need,
                                      seed_combine(spec.seed, static_cast<std::uint64_t>(cls), 1));
            const data::ClassLabel label = windows[idx[0]].label;
            for (int s = 0; s < need; ++s) {
                data::Window w;
                w.values = std::move(samples[s]);
                w.label = label;
                w.source_id = "gmm:" + label.name + ":" + std::to_string(s);
                result.windows.push_back(std::move(w));
            }
        }
        result.models.emplace(cls, std::move(fit.model));
    }
    return result;
}

AugmentResult apply_augment(const std::vector<data::Window>& windows, const AugmentSpec& spec) {
    AugmentResult result;
    switch (spec.kind) {
        case AugmentKind::kNone:
            result.windows = windows;
            return result;
        case AugmentKind::kOversample:
            result.windows = oversample(windows, spec.seed);
            return result;
        default:
            return augment_gmm(windows, spec);
    }
}

void write_model_csv(const GmmModel& model, const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "component,weight";
    for (int j = 0; j < model.dim; ++j) out << ",mean" << j;
    for (int j = 0; j < model.dim; ++j) out << ",variance" << j;
    out << '\n';
    char buf[64];
    for (int c = 0; c < model.num_components; ++c) {
        out << c;
        std::snprintf(buf, sizeof(buf), "%.17g", model.weights[c]);
        out << ',' << buf;
        for (int j = 0; j < model.dim; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", model.means[c][j]);
            out << ',' << buf;
        }
        for (int j = 0; j < model.dim; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", model.variances[c][j]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace noisebench::augment
