#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "noisebench/dataset.hpp"

namespace noisebench::nn {

// Activations flowing through the network, row-major by channel.
struct FeatureMap {
    int channels = 0;
    int length = 0;
    std::vector<double> values;

    FeatureMap() = default;
    FeatureMap(int c, int l) : channels(c), length(l), values(static_cast<std::size_t>(c) * l, 0.0) {}

    double& at(int c, int t) { return values[static_cast<std::size_t>(c) * length + t]; }
    double at(int c, int t) const { return values[static_cast<std::size_t>(c) * length + t]; }
};

enum class Padding { kSame, kValid };
enum class LayerKind { kConv1d, kSepConv1d, kRelu, kMaxPool1d, kGlobalAvgPool, kDense, kSoftmax };

std::string layer_kind_name(LayerKind kind);

struct LayerSpec {
    LayerKind kind;
    int kernel = 0;        // conv taps, pool window (pool stride == window)
    int out_channels = 0;  // conv filters / dense features
    int stride = 1;
    Padding padding = Padding::kSame;

    bool operator==(const LayerSpec&) const = default;
};

// Parameter tensor with gradient and Adam moments.
struct Tensor {
    std::vector<double> value, grad, m1, m2;

    explicit Tensor(std::size_t n)
        : value(n, 0.0), grad(n, 0.0), m1(n, 0.0), m2(n, 0.0) {}
    std::size_t size() const { return value.size(); }
};

struct NamedParam {
    Tensor* tensor;
    std::string layer;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual FeatureMap forward(const FeatureMap& in) = 0;
    // consumes the cache of the immediately preceding forward call
    virtual FeatureMap backward(const FeatureMap& grad_out) = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::string name() const = 0;
};

int conv_output_length(int in_length, int kernel, int stride, Padding padding);
int conv_pad_left(int in_length, int kernel, int stride, Padding padding);

// out[o][t] = bias[o] + sum_{c,j} w[o][c][j] * in[c][t*stride + j - pad]
FeatureMap conv1d_forward(const FeatureMap& input, const std::vector<double>& weights,
                          const std::vector<double>& bias, int out_channels, int kernel,
                          int stride, Padding padding);

// depthwise k-tap filter per channel (stride/padding here), then 1x1 pointwise mix
FeatureMap sepconv1d_forward(const FeatureMap& input, const std::vector<double>& depthwise,
                             const std::vector<double>& depthwise_bias,
                             const std::vector<double>& pointwise,
                             const std::vector<double>& pointwise_bias, int out_channels,
                             int kernel, int stride, Padding padding);

std::int64_t conv1d_param_count(int in_channels, int out_channels, int kernel);
std::int64_t sepconv1d_param_count(int in_channels, int out_channels, int kernel);

struct SoftmaxCrossEntropy {
    double loss;
    std::vector<double> grad;  // d loss / d logits = softmax - onehot
};

SoftmaxCrossEntropy softmax_cross_entropy(const std::vector<double>& logits, int label);

class Model {
public:
    Model() = default;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    // Kaiming-uniform weights, zero biases, seed-deterministic.
    static Model build(const std::vector<LayerSpec>& arch, int in_channels, int in_length,
                       std::uint64_t seed);

    FeatureMap forward(const FeatureMap& in);         // whole chain, softmax included
    FeatureMap forward_logits(const FeatureMap& in);  // stops before a trailing softmax
    // accumulates parameter gradients and returns the gradient w.r.t. the input
    FeatureMap backward_from_logits(const std::vector<double>& grad_logits);
    void zero_grad();

    std::vector<NamedParam> parameters();
    std::vector<std::vector<double>> snapshot_values() const;
    void restore_values(const std::vector<std::vector<double>>& snapshot);

    const std::vector<LayerSpec>& specs() const { return specs_; }
    int input_channels() const { return input_channels_; }
    int input_length() const { return input_length_; }
    int output_size() const { return output_size_; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<LayerSpec> specs_;
    int input_channels_ = 0;
    int input_length_ = 0;
    int output_size_ = 0;
    int logits_channels_ = 0;  // shape emitted by the layer before the softmax tail
    int logits_length_ = 0;
    bool has_softmax_tail_ = false;
};

struct TrainConfig {
    int epochs = 12;
    int batch_size = 32;
    double learning_rate = 3e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    int early_stop_patience = 3;  // 0 disables early stopping
};

// Bias-corrected Adam on every tensor; step is 1-based.
// Throws on non-finite gradients, naming the offending layer.
void adam_step(std::vector<NamedParam>& params, const TrainConfig& config, std::int64_t step);

class EarlyStopTracker {
public:
    explicit EarlyStopTracker(int patience) : patience_(patience) {}

    bool observe(double score, int epoch) {
        if (score > best_) {
            best_ = score;
            best_epoch_ = epoch;
            since_best_ = 0;
            return true;
        }
        ++since_best_;
        return false;
    }
    bool should_stop() const { return patience_ > 0 && since_best_ >= patience_; }
    int best_epoch() const { return best_epoch_; }

private:
    int patience_;
    double best_ = -1.0;
    int best_epoch_ = -1;
    int since_best_ = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_macro_f1 = 0.0;
};

struct TrainResult {
    Model model;  // parameters of the best validation epoch
    std::vector<EpochStats> history;
    int best_epoch = -1;  // 1-based
    int epochs_run = 0;
};

// Mini-batch Adam with seeded shuffling; windows must be standardized and
// labels dense in [0, num_classes).
TrainResult train(const std::vector<LayerSpec>& arch,
                  const std::vector<data::Window>& train_windows,
                  const std::vector<data::Window>& val_windows, int num_classes,
                  const TrainConfig& config);

std::vector<int> predict(Model& model, const std::vector<data::Window>& windows);

FeatureMap to_feature_map(const data::Window& w);

// Central-difference check of the batch-mean cross-entropy gradients.
// Returns the max relative error over every parameter scalar.
double gradient_check(Model& model, const std::vector<FeatureMap>& inputs,
                      const std::vector<int>& labels, double h);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace noisebench::nn
