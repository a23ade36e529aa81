#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "noisebench/dataset.hpp"

namespace noisebench::augment {

// Per-class mixture with diagonal covariances over window vectors.
struct GmmModel {
    int num_components = 0;
    int dim = 0;
    std::vector<double> weights;                // K_g, sums to 1
    std::vector<std::vector<double>> means;     // K_g x D
    std::vector<std::vector<double>> variances; // K_g x D, floored positive
};

enum class AugmentKind { kNone, kOversample, kGmm };

std::string augment_name(AugmentKind kind);
AugmentKind augment_from_name(const std::string& name);

struct AugmentSpec {
    AugmentKind kind = AugmentKind::kNone;
    int gmm_components = 3;
    int target_per_class = 0;  // 0 = match-majority
    std::uint64_t seed = 0;
    int gmm_max_iters = 100;
    double gmm_tol = 1e-6;
};

struct AugmentResult {
    std::vector<data::Window> windows;
    std::vector<std::string> warnings;
    std::map<int, GmmModel> models;  // per class, GMM kind only
};

// Tops minority classes up to the majority count by resampling existing
// windows with replacement; originals all retained.
std::vector<data::Window> oversample(const std::vector<data::Window>& windows,
                                     std::uint64_t seed);

struct GmmFit {
    GmmModel model;
    std::vector<double> log_likelihood_trace;  // mean log-likelihood per iteration
};

// Diagonal-covariance EM: k-means++-style mean seeding, log-sum-exp E-step,
// variance flooring in the M-step. Stops on |delta mean LL| < tol or max_iters.
GmmFit gmm_fit(const std::vector<std::vector<double>>& vectors, int components,
               int max_iters, double tol, std::uint64_t seed);

std::vector<std::vector<double>> gmm_sample(const GmmModel& model, int n, std::uint64_t seed);

// Fits one mixture per class and samples synthetic windows until every class
// reaches the target count; falls back to fewer components (with a warning)
// when a class is smaller than the requested component count.
AugmentResult augment_gmm(const std::vector<data::Window>& windows, const AugmentSpec& spec);

AugmentResult apply_augment(const std::vector<data::Window>& windows, const AugmentSpec& spec);

// Inspection dump: one row per component, `component,weight,mean...,variance...`.
void write_model_csv(const GmmModel& model, const std::string& out_path);

}  // namespace noisebench::augment
