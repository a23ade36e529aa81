#include "noisebench/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "noisebench/metrics.hpp"
#include "noisebench/rng.hpp"

namespace noisebench::nn {

std::string layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::kConv1d: return "conv1d";
        case LayerKind::kSepConv1d: return "sepconv1d";
        case LayerKind::kRelu: return "relu";
        case LayerKind::kMaxPool1d: return "maxpool1d";
        case LayerKind::kGlobalAvgPool: return "globalavgpool";
        case LayerKind::kDense: return "dense";
        case LayerKind::kSoftmax: return "softmax";
    }
    return "unknown";
}

int conv_output_length(int in_length, int kernel, int stride, Padding padding) {
    if (padding == Padding::kSame) {
        return (in_length + stride - 1) / stride;  // ceil(L / stride)
    }
    if (in_length < kernel) {
        throw std::invalid_argument("conv: VALID padding needs input length >= kernel (" +
                                    std::to_string(in_length) + " < " + std::to_string(kernel) + ")");
    }
    return (in_length - kernel) / stride + 1;
}

int conv_pad_left(int in_length, int kernel, int stride, Padding padding) {
    if (padding == Padding::kValid) return 0;
    const int out_len = conv_output_length(in_length, kernel, stride, padding);
    const int total = std::max(0, (out_len - 1) * stride + kernel - in_length);
    return total / 2;
}

FeatureMap conv1d_forward(const FeatureMap& input, const std::vector<double>& weights,
                          const std::vector<double>& bias, int out_channels, int kernel,
                          int stride, Padding padding) {
    const int cin = input.channels;
    const int len = input.length;
    if (weights.size() != static_cast<std::size_t>(out_channels) * cin * kernel ||
        bias.size() != static_cast<std::size_t>(out_channels)) {
        throw std::invalid_argument("conv1d_forward: weight/bias shape mismatch");
    }
    const int out_len = conv_output_length(len, kernel, stride, padding);
    const int pad = conv_pad_left(len, kernel, stride, padding);

    FeatureMap out(out_channels, out_len);
    for (int o = 0; o < out_channels; ++o) {
        double* out_row = &out.values[static_cast<std::size_t>(o) * out_len];
        for (int t = 0; t < out_len; ++t) {
            const int start = t * stride - pad;
            const int j0 = std::max(0, -start);
            const int j1 = std::min(kernel, len - start);
            double acc = bias[o];
            for (int c = 0; c < cin; ++c) {
                const double* w = &weights[(static_cast<std::size_t>(o) * cin + c) * kernel];
                const double* x = &input.values[static_cast<std::size_t>(c) * len];
                for (int j = j0; j < j1; ++j) acc += w[j] * x[start + j];
            }
            out_row[t] = acc;
        }
    }
    return out;
}

FeatureMap sepconv1d_forward(const FeatureMap& input, const std::vector<double>& depthwise,
                             const std::vector<double>& depthwise_bias,
                             const std::vector<double>& pointwise,
                             const std::vector<double>& pointwise_bias, int out_channels,
                             int kernel, int stride, Padding padding) {
    const int cin = input.channels;
    const int len = input.length;
    if (depthwise.size() != static_cast<std::size_t>(cin) * kernel ||
        depthwise_bias.size() != static_cast<std::size_t>(cin) ||
        pointwise.size() != static_cast<std::size_t>(out_channels) * cin ||
        pointwise_bias.size() != static_cast<std::size_t>(out_channels)) {
        throw std::invalid_argument("sepconv1d_forward: weight/bias shape mismatch");
    }
    const int out_len = conv_output_length(len, kernel, stride, padding);
    const int pad = conv_pad_left(len, kernel, stride, padding);

    FeatureMap mid(cin, out_len);
    for (int c = 0; c < cin; ++c) {
        const double* w = &depthwise[static_cast<std::size_t>(c) * kernel];
        const double* x = &input.values[static_cast<std::size_t>(c) * len];
        double* m = &mid.values[static_cast<std::size_t>(c) * out_len];
        for (int t = 0; t < out_len; ++t) {
            const int start = t * stride - pad;
            const int j0 = std::max(0, -start);
            const int j1 = std::min(kernel, len - start);
            double acc = depthwise_bias[c];
            for (int j = j0; j < j1; ++j) acc += w[j] * x[start + j];
            m[t] = acc;
        }
    }
    FeatureMap out(out_channels, out_len);
    for (int o = 0; o < out_channels; ++o) {
        double* out_row = &out.values[static_cast<std::size_t>(o) * out_len];
        const double* p = &pointwise[static_cast<std::size_t>(o) * cin];
        for (int t = 0; t < out_len; ++t) out_row[t] = pointwise_bias[o];
        for (int c = 0; c < cin; ++c) {
            const double pc = p[c];
            const double* m = &mid.values[static_cast<std::size_t>(c) * out_len];
            for (int t = 0; t < out_len; ++t) out_row[t] += pc * m[t];
        }
    }
    return out;
}

std::int64_t conv1d_param_count(int in_channels, int out_channels, int kernel) {
    return static_cast<std::int64_t>(kernel) * in_channels * out_channels + out_channels;
}

std::int64_t sepconv1d_param_count(int in_channels, int out_channels, int kernel) {
    return static_cast<std::int64_t>(kernel) * in_channels + in_channels +
           static_cast<std::int64_t>(in_channels) * out_channels + out_channels;
}

SoftmaxCrossEntropy softmax_cross_entropy(const std::vector<double>& logits, int label) {
    if (label < 0 || label >= static_cast<int>(logits.size())) {
        throw std::invalid_argument("softmax_cross_entropy: label out of range");
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum_exp = 0.0;
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - max_logit);
        sum_exp += p[i];
    }
    for (double& v : p) v /= sum_exp;
    SoftmaxCrossEntropy result;
    result.loss = -(logits[label] - max_logit - std::log(sum_exp));
    result.grad = std::move(p);
    result.grad[label] -= 1.0;
    return result;
}

namespace {

void init_kaiming_uniform(std::vector<double>& w, int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& x : w) x = bound * (2.0 * rng.next_double() - 1.0);
}

class Conv1dLayer : public Layer {
public:
    Conv1dLayer(int index, int cin, int cout, int kernel, int stride, Padding padding, Rng& rng)
        : name_("conv1d[" + std::to_string(index) + "]"),
          cin_(cin), cout_(cout), kernel_(kernel), stride_(stride), padding_(padding),
          weights_(static_cast<std::size_t>(cout) * cin * kernel),
          bias_(static_cast<std::size_t>(cout)) {
        init_kaiming_uniform(weights_.value, cin * kernel, rng);
    }

    FeatureMap forward(const FeatureMap& in) override {
        input_ = in;
        return conv1d_forward(in, weights_.value, bias_.value, cout_, kernel_, stride_, padding_);
    }

    FeatureMap backward(const FeatureMap& grad_out) override {
        const int len = input_.length;
        const int out_len = grad_out.length;
        const int pad = conv_pad_left(len, kernel_, stride_, padding_);
        FeatureMap grad_in(cin_, len);
        for (int o = 0; o < cout_; ++o) {
            const double* g = &grad_out.values[static_cast<std::size_t>(o) * out_len];
            double gb = 0.0;
            for (int t = 0; t < out_len; ++t) gb += g[t];
            bias_.grad[o] += gb;
            for (int t = 0; t < out_len; ++t) {
                const double gt = g[t];
                const int start = t * stride_ - pad;
                const int j0 = std::max(0, -start);
                const int j1 = std::min(kernel_, len - start);
                for (int c = 0; c < cin_; ++c) {
                    double* wg = &weights_.grad[(static_cast<std::size_t>(o) * cin_ + c) * kernel_];
                    const double* w = &weights_.value[(static_cast<std::size_t>(o) * cin_ + c) * kernel_];
                    const double* x = &input_.values[static_cast<std::size_t>(c) * len];
                    double* gi = &grad_in.values[static_cast<std::size_t>(c) * len];
                    for (int j = j0; j < j1; ++j) {
                        wg[j] += gt * x[start + j];
                        gi[start + j] += gt * w[j];
                    }
                }
            }
        }
        return grad_in;
    }

    std::vector<Tensor*> params() override { return {&weights_, &bias_}; }
    std::string name() const override { return name_; }

private:
    std::string name_;
    int cin_, cout_, kernel_, stride_;
    Padding padding_;
    Tensor weights_, bias_;
    FeatureMap input_;
};

class SepConv1dLayer : public Layer {
public:
    SepConv1dLayer(int index, int cin, int cout, int kernel, int stride, Padding padding, Rng& rng)
        : name_("sepconv1d[" + std::to_string(index) + "]"),
          cin_(cin), cout_(cout), kernel_(kernel), stride_(stride), padding_(padding),
          depthwise_(static_cast<std::size_t>(cin) * kernel),
          depthwise_bias_(static_cast<std::size_t>(cin)),
          pointwise_(static_cast<std::size_t>(cout) * cin),
          pointwise_bias_(static_cast<std::size_t>(cout)) {
        init_kaiming_uniform(depthwise_.value, kernel, rng);
        init_kaiming_uniform(pointwise_.value, cin, rng);
    }

    FeatureMap forward(const FeatureMap& in) override {
        input_ = in;
        const int out_len = conv_output_length(in.length, kernel_, stride_, padding_);
        const int pad = conv_pad_left(in.length, kernel_, stride_, padding_);
        mid_ = FeatureMap(cin_, out_len);
        for (int c = 0; c < cin_; ++c) {
            const double* w = &depthwise_.value[static_cast<std::size_t>(c) * kernel_];
            const double* x = &in.values[static_cast<std::size_t>(c) * in.length];
            double* m = &mid_.values[static_cast<std::size_t>(c) * out_len];
            for (int t = 0; t < out_len; ++t) {
                const int start = t * stride_ - pad;
                const int j0 = std::max(0, -start);
                const int j1 = std::min(kernel_, in.length - start);
                double acc = depthwise_bias_.value[c];
                for (int j = j0; j < j1; ++j) acc += w[j] * x[start + j];
                m[t] = acc;
            }
        }
        FeatureMap out(cout_, out_len);
        for (int o = 0; o < cout_; ++o) {
            double* out_row = &out.values[static_cast<std::size_t>(o) * out_len];
            const double* p = &pointwise_.value[static_cast<std::size_t>(o) * cin_];
            for (int t = 0; t < out_len; ++t) out_row[t] = pointwise_bias_.value[o];
            for (int c = 0; c < cin_; ++c) {
                const double pc = p[c];
                const double* m = &mid_.values[static_cast<std::size_t>(c) * out_len];
                for (int t = 0; t < out_len; ++t) out_row[t] += pc * m[t];
            }
        }
        return out;
    }

    FeatureMap backward(const FeatureMap& grad_out) override {
        const int len = input_.length;
        const int out_len = grad_out.length;
        const int pad = conv_pad_left(len, kernel_, stride_, padding_);

        FeatureMap grad_mid(cin_, out_len);
        for (int o = 0; o < cout_; ++o) {
            const double* g = &grad_out.values[static_cast<std::size_t>(o) * out_len];
            double gb = 0.0;
            for (int t = 0; t < out_len; ++t) gb += g[t];
            pointwise_bias_.grad[o] += gb;
            const double* p = &pointwise_.value[static_cast<std::size_t>(o) * cin_];
            double* pg = &pointwise_.grad[static_cast<std::size_t>(o) * cin_];
            for (int c = 0; c < cin_; ++c) {
                const double* m = &mid_.values[static_cast<std::size_t>(c) * out_len];
                double* gm = &grad_mid.values[static_cast<std::size_t>(c) * out_len];
                double acc = 0.0;
                const double pc = p[c];
                for (int t = 0; t < out_len; ++t) {
                    acc += g[t] * m[t];
                    gm[t] += pc * g[t];
                }
                pg[c] += acc;
            }
        }

        FeatureMap grad_in(cin_, len);
        for (int c = 0; c < cin_; ++c) {
            const double* gm = &grad_mid.values[static_cast<std::size_t>(c) * out_len];
            const double* w = &depthwise_.value[static_cast<std::size_t>(c) * kernel_];
            double* wg = &depthwise_.grad[static_cast<std::size_t>(c) * kernel_];
            const double* x = &input_.values[static_cast<std::size_t>(c) * len];
            double* gi = &grad_in.values[static_cast<std::size_t>(c) * len];
            double gb = 0.0;
            for (int t = 0; t < out_len; ++t) {
                const double gt = gm[t];
                gb += gt;
                const int start = t * stride_ - pad;
                const int j0 = std::max(0, -start);
                const int j1 = std::min(kernel_, len - start);
                for (int j = j0; j < j1; ++j) {
                    wg[j] += gt * x[start + j];
                    gi[start + j] += gt * w[j];
                }
            }
            depthwise_bias_.grad[c] += gb;
        }
        return grad_in;
    }

    std::vector<Tensor*> params() override {
        return {&depthwise_, &depthwise_bias_, &pointwise_, &pointwise_bias_};
    }
    std::string name() const override { return name_; }

private:
    std::string name_;
    int cin_, cout_, kernel_, stride_;
    Padding padding_;
    Tensor depthwise_, depthwise_bias_, pointwise_, pointwise_bias_;
    FeatureMap input_, mid_;
};

class ReluLayer : public Layer {
public:
    explicit ReluLayer(int index) : name_("relu[" + std::to_string(index) + "]") {}

    FeatureMap forward(const FeatureMap& in) override {
        mask_.assign(in.values.size(), false);
        FeatureMap out = in;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            if (out.values[i] > 0.0) {
                mask_[i] = true;
            } else {
                out.values[i] = 0.0;
            }
        }
        return out;
    }

    FeatureMap backward(const FeatureMap& grad_out) override {
        FeatureMap grad_in = grad_out;
        for (std::size_t i = 0; i < grad_in.values.size(); ++i) {
            if (!mask_[i]) grad_in.values[i] = 0.0;
        }
        return grad_in;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::vector<bool> mask_;
};

class MaxPool1dLayer : public Layer {
public:
    MaxPool1dLayer(int index, int window)
        : name_("maxpool1d[" + std::to_string(index) + "]"), window_(window) {}

    FeatureMap forward(const FeatureMap& in) override {
        if (in.length < window_) {
            throw std::invalid_argument(name_ + ": input length " + std::to_string(in.length) +
                                        " shorter than pool window " + std::to_string(window_));
        }
        in_channels_ = in.channels;
        in_length_ = in.length;
        const int out_len = in.length / window_;
        FeatureMap out(in.channels, out_len);
        argmax_.assign(static_cast<std::size_t>(in.channels) * out_len, 0);
        for (int c = 0; c < in.channels; ++c) {
            const double* x = &in.values[static_cast<std::size_t>(c) * in.length];
            for (int t = 0; t < out_len; ++t) {
                int best = t * window_;
                double best_val = x[best];
                for (int j = 1; j < window_; ++j) {
                    const int i = t * window_ + j;
                    if (x[i] > best_val) {  // strict: first max wins ties
                        best_val = x[i];
                        best = i;
                    }
                }
                out.at(c, t) = best_val;
                argmax_[static_cast<std::size_t>(c) * out_len + t] = best;
            }
        }
        return out;
    }

    FeatureMap backward(const FeatureMap& grad_out) override {
        FeatureMap grad_in(in_channels_, in_length_);
        const int out_len = grad_out.length;
        for (int c = 0; c < in_channels_; ++c) {
            for (int t = 0; t < out_len; ++t) {
                grad_in.at(c, argmax_[static_cast<std::size_t>(c) * out_len + t]) +=
                    grad_out.at(c, t);
            }
        }
        return grad_in;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    int window_;
    int in_channels_ = 0, in_length_ = 0;
    std::vector<int> argmax_;
};

class GlobalAvgPoolLayer : public Layer {
public:
    explicit GlobalAvgPoolLayer(int index)
        : name_("globalavgpool[" + std::to_string(index) + "]") {}

    FeatureMap forward(const FeatureMap& in) override {
        in_length_ = in.length;
        FeatureMap out(in.channels, 1);
        for (int c = 0; c < in.channels; ++c) {
            double s = 0.0;
            const double* x = &in.values[static_cast<std::size_t>(c) * in.length];
            for (int t = 0; t < in.length; ++t) s += x[t];
            out.at(c, 0) = s / static_cast<double>(in.length);
        }
        return out;
    }

    FeatureMap backward(const FeatureMap& grad_out) override {
        FeatureMap grad_in(grad_out.channels, in_length_);
        for (int c = 0; c < grad_out.channels; ++c) {
            const double g = grad_out.at(c, 0) / static_cast<double>(in_length_);
            for (int t = 0; t < in_length_; ++t) grad_in.at(c, t) = g;
        }
        return grad_in;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    int in_length_ = 0;
};

class DenseLayer : public Layer {
public:
    DenseLayer(int index, int in_features, int out_features, Rng& rng)
        : name_("dense[" + std::to_string(index) + "]"),
          in_features_(in_features), out_features_(out_features),
          weights_(static_cast<std::size_t>(out_features) * in_features),
          bias_(static_cast<std::size_t>(out_features)) {
        init_kaiming_uniform(weights_.value, in_features, rng);
    }

    FeatureMap forward(const FeatureMap& in) override {
        if (static_cast<int>(in.values.size()) != in_features_) {
            throw std::invalid_argument(name_ + ": expected " + std::to_string(in_features_) +
                                        " inputs, got " + std::to_string(in.values.size()));
        }
        input_ = in;  // dense flattens channels x length
        FeatureMap out(out_features_, 1);
        for (int o = 0; o < out_features_; ++o) {
            const double* w = &weights_.value[static_cast<std::size_t>(o) * in_features_];
            double acc = bias_.value[o];
            for (int i = 0; i < in_features_; ++i) acc += w[i] * in.values[i];
            out.values[o] = acc;
        }
        return out;
    }

    FeatureMap backward(const FeatureMap& grad_out) override {
        FeatureMap grad_in(input_.channels, input_.length);
        for (int o = 0; o < out_features_; ++o) {
            const double g = grad_out.values[o];
            bias_.grad[o] += g;
            double* wg = &weights_.grad[static_cast<std::size_t>(o) * in_features_];
            const double* w = &weights_.value[static_cast<std::size_t>(o) * in_features_];
            for (int i = 0; i < in_features_; ++i) {
                wg[i] += g * input_.values[i];
                grad_in.values[i] += g * w[i];
            }
        }
        return grad_in;
    }

    std::vector<Tensor*> params() override { return {&weights_, &bias_}; }
    std::string name() const override { return name_; }

private:
    std::string name_;
    int in_features_, out_features_;
    Tensor weights_, bias_;
    FeatureMap input_;
};

class SoftmaxLayer : public Layer {
public:
    explicit SoftmaxLayer(int index) : name_("softmax[" + std::to_string(index) + "]") {}

    FeatureMap forward(const FeatureMap& in) override {
        FeatureMap out = in;
        const double max_v = *std::max_element(out.values.begin(), out.values.end());
        double sum = 0.0;
        for (double& v : out.values) {
            v = std::exp(v - max_v);
            sum += v;
        }
        for (double& v : out.values) v /= sum;
        output_ = out;
        return out;
    }

    FeatureMap backward(const FeatureMap& grad_out) override {
        double dot = 0.0;
        for (std::size_t i = 0; i < output_.values.size(); ++i) {
            dot += grad_out.values[i] * output_.values[i];
        }
        FeatureMap grad_in = grad_out;
        for (std::size_t i = 0; i < grad_in.values.size(); ++i) {
            grad_in.values[i] = output_.values[i] * (grad_out.values[i] - dot);
        }
        return grad_in;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    FeatureMap output_;
};

}  // namespace

Model Model::build(const std::vector<LayerSpec>& arch, int in_channels, int in_length,
                   std::uint64_t seed) {
    if (arch.empty()) throw std::invalid_argument("model: empty architecture");
    if (in_channels < 1 || in_length < 1) {
        throw std::invalid_argument("model: input must have positive channels and length");
    }
    Model model;
    model.specs_ = arch;
    model.input_channels_ = in_channels;
    model.input_length_ = in_length;
    Rng rng(seed_combine(seed, fnv1a64("weight-init")));

    int channels = in_channels;
    int length = in_length;
    for (std::size_t i = 0; i < arch.size(); ++i) {
        const LayerSpec& spec = arch[i];
        const int index = static_cast<int>(i);
        switch (spec.kind) {
            case LayerKind::kConv1d:
            case LayerKind::kSepConv1d: {
                if (spec.kernel < 1) throw std::invalid_argument("conv: kernel must be >= 1");
                if (spec.stride < 1) throw std::invalid_argument("conv: stride must be >= 1");
                if (spec.out_channels < 1) throw std::invalid_argument("conv: out_channels must be >= 1");
                const int out_len = conv_output_length(length, spec.kernel, spec.stride, spec.padding);
                if (spec.kind == LayerKind::kConv1d) {
                    model.layers_.push_back(std::make_unique<Conv1dLayer>(
                        index, channels, spec.out_channels, spec.kernel, spec.stride, spec.padding, rng));
                } else {
                    model.layers_.push_back(std::make_unique<SepConv1dLayer>(
                        index, channels, spec.out_channels, spec.kernel, spec.stride, spec.padding, rng));
                }
                channels = spec.out_channels;
                length = out_len;
                break;
            }
            case LayerKind::kRelu:
                model.layers_.push_back(std::make_unique<ReluLayer>(index));
                break;
            case LayerKind::kMaxPool1d: {
                if (spec.kernel < 1) throw std::invalid_argument("maxpool: window must be >= 1");
                if (length < spec.kernel) {
                    throw std::invalid_argument("maxpool: input length " + std::to_string(length) +
                                                " shorter than window " + std::to_string(spec.kernel));
                }
                model.layers_.push_back(std::make_unique<MaxPool1dLayer>(index, spec.kernel));
                length = length / spec.kernel;
                break;
            }
            case LayerKind::kGlobalAvgPool:
                model.layers_.push_back(std::make_unique<GlobalAvgPoolLayer>(index));
                length = 1;
                break;
            case LayerKind::kDense: {
                if (spec.out_channels < 1) throw std::invalid_argument("dense: out_channels must be >= 1");
                model.layers_.push_back(
                    std::make_unique<DenseLayer>(index, channels * length, spec.out_channels, rng));
                channels = spec.out_channels;
                length = 1;
                break;
            }
            case LayerKind::kSoftmax:
                if (i + 1 != arch.size()) {
                    throw std::invalid_argument("model: softmax must be the final layer");
                }
                model.layers_.push_back(std::make_unique<SoftmaxLayer>(index));
                model.has_softmax_tail_ = true;
                break;
        }
    }
    model.output_size_ = channels * length;
    return model;
}

FeatureMap Model::forward(const FeatureMap& in) {
    if (in.channels != input_channels_ || in.length != input_length_) {
        throw std::invalid_argument("model: input shape mismatch");
    }
    FeatureMap fm = in;
    for (auto& layer : layers_) fm = layer->forward(fm);
    return fm;
}

FeatureMap Model::forward_logits(const FeatureMap& in) {
    if (in.channels != input_channels_ || in.length != input_length_) {
        throw std::invalid_argument("model: input shape mismatch");
    }
    FeatureMap fm = in;
    const std::size_t stop = layers_.size() - (has_softmax_tail_ ? 1 : 0);
    for (std::size_t i = 0; i < stop; ++i) fm = layers_[i]->forward(fm);
    logits_channels_ = fm.channels;
    logits_length_ = fm.length;
    return fm;
}

FeatureMap Model::backward_from_logits(const std::vector<double>& grad_logits) {
    const std::size_t stop = layers_.size() - (has_softmax_tail_ ? 1 : 0);
    if (static_cast<int>(grad_logits.size()) != output_size_) {
        throw std::invalid_argument("model: logit gradient size mismatch");
    }
    FeatureMap grad;
    grad.channels = logits_channels_;
    grad.length = logits_length_;
    grad.values = grad_logits;
    for (std::size_t i = stop; i-- > 0;) {
        grad = layers_[i]->backward(grad);
    }
    return grad;
}

void Model::zero_grad() {
    for (auto& layer : layers_) {
        for (Tensor* t : layer->params()) {
            std::fill(t->grad.begin(), t->grad.end(), 0.0);
        }
    }
}

std::vector<NamedParam> Model::parameters() {
    std::vector<NamedParam> out;
    for (auto& layer : layers_) {
        for (Tensor* t : layer->params()) out.push_back({t, layer->name()});
    }
    return out;
}

std::vector<std::vector<double>> Model::snapshot_values() const {
    std::vector<std::vector<double>> snapshot;
    for (const auto& layer : layers_) {
        for (Tensor* t : const_cast<Layer&>(*layer).params()) snapshot.push_back(t->value);
    }
    return snapshot;
}

void Model::restore_values(const std::vector<std::vector<double>>& snapshot) {
    std::size_t k = 0;
    for (auto& layer : layers_) {
        for (Tensor* t : layer->params()) {
            if (k >= snapshot.size() || snapshot[k].size() != t->value.size()) {
                throw std::invalid_argument("model: snapshot shape mismatch");
            }
            t->value = snapshot[k++];
        }
    }
}

void adam_step(std::vector<NamedParam>& params, const TrainConfig& config, std::int64_t step) {
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
    for (auto& [tensor, layer] : params) {
        for (std::size_t i = 0; i < tensor->size(); ++i) {
            const double g = tensor->grad[i];
            if (!std::isfinite(g)) {
                throw std::runtime_error("non-finite gradient in layer " + layer);
            }
            tensor->m1[i] = config.beta1 * tensor->m1[i] + (1.0 - config.beta1) * g;
            tensor->m2[i] = config.beta2 * tensor->m2[i] + (1.0 - config.beta2) * g * g;
            const double m_hat = tensor->m1[i] / bc1;
            const double v_hat = tensor->m2[i] / bc2;
            tensor->value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

FeatureMap to_feature_map(const data::Window& w) {
    FeatureMap fm;
    fm.channels = 1;
    fm.length = static_cast<int>(w.values.size());
    fm.values = w.values;
    return fm;
}

namespace {

void validate_train_config(const TrainConfig& config) {
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(config.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
    if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 || config.beta2 >= 1.0) {
        throw std::invalid_argument("train: betas must lie in [0, 1)");
    }
}

}  // namespace

TrainResult train(const std::vector<LayerSpec>& arch,
                  const std::vector<data::Window>& train_windows,
                  const std::vector<data::Window>& val_windows, int num_classes,
                  const TrainConfig& config) {
    validate_train_config(config);
    if (train_windows.empty()) throw std::invalid_argument("train: empty training set");
    const int input_length = static_cast<int>(train_windows[0].values.size());
    for (const auto& w : train_windows) {
        if (static_cast<int>(w.values.size()) != input_length) {
            throw std::invalid_argument("train: inconsistent window lengths");
        }
        if (w.label.index < 0 || w.label.index >= num_classes) {
            throw std::invalid_argument("train: label index out of range");
        }
    }

    TrainResult result;
    result.model = Model::build(arch, 1, input_length, seed_combine(config.seed, fnv1a64("init")));
    Model& model = result.model;
    if (model.output_size() != num_classes) {
        throw std::invalid_argument("train: architecture emits " +
                                    std::to_string(model.output_size()) + " outputs for " +
                                    std::to_string(num_classes) + " classes");
    }
    auto params = model.parameters();

    std::vector<std::size_t> order(train_windows.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(seed_combine(config.seed, fnv1a64("shuffle")));

    EarlyStopTracker tracker(config.early_stop_patience);
    std::vector<std::vector<double>> best_snapshot;
    std::int64_t step = 0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - begin);
            model.zero_grad();
            for (std::size_t k = begin; k < end; ++k) {
                const data::Window& w = train_windows[order[k]];
                FeatureMap logits = model.forward_logits(to_feature_map(w));
                auto ce = softmax_cross_entropy(logits.values, w.label.index);
                loss_sum += ce.loss;
                for (double& g : ce.grad) g *= inv_batch;
                model.backward_from_logits(ce.grad);
            }
            adam_step(params, config, ++step);
        }
        const double train_loss = loss_sum / static_cast<double>(order.size());
        if (!std::isfinite(train_loss)) {
            throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch));
        }

        double val_f1 = 0.0;
        if (!val_windows.empty()) {
            std::vector<int> y_true, y_pred;
            y_true.reserve(val_windows.size());
            for (const auto& w : val_windows) y_true.push_back(w.label.index);
            y_pred = predict(model, val_windows);
            val_f1 = metrics::macro_f1(metrics::confusion(y_true, y_pred, num_classes)).macro_f1;
        }
        result.history.push_back({train_loss, val_f1});
        result.epochs_run = epoch;

        if (val_windows.empty()) continue;
        if (tracker.observe(val_f1, epoch)) {
            best_snapshot = model.snapshot_values();
        }
        if (tracker.should_stop()) break;
    }

    if (!best_snapshot.empty()) {
        model.restore_values(best_snapshot);
        result.best_epoch = tracker.best_epoch();
    } else {
        result.best_epoch = result.epochs_run;
    }
    return result;
}

std::vector<int> predict(Model& model, const std::vector<data::Window>& windows) {
    std::vector<int> labels;
    labels.reserve(windows.size());
    for (const auto& w : windows) {
        FeatureMap logits = model.forward_logits(to_feature_map(w));
        const auto it = std::max_element(logits.values.begin(), logits.values.end());
        labels.push_back(static_cast<int>(it - logits.values.begin()));  // first max on ties
    }
    return labels;
}

namespace {

double batch_loss(Model& model, const std::vector<FeatureMap>& inputs,
                  const std::vector<int>& labels) {
    double loss = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        FeatureMap logits = model.forward_logits(inputs[i]);
        loss += softmax_cross_entropy(logits.values, labels[i]).loss;
    }
    return loss / static_cast<double>(inputs.size());
}

}  // namespace

double gradient_check(Model& model, const std::vector<FeatureMap>& inputs,
                      const std::vector<int>& labels, double h) {
    if (inputs.empty() || inputs.size() != labels.size()) {
        throw std::invalid_argument("gradient_check: empty or mismatched batch");
    }
    model.zero_grad();
    const double inv_batch = 1.0 / static_cast<double>(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        FeatureMap logits = model.forward_logits(inputs[i]);
        auto ce = softmax_cross_entropy(logits.values, labels[i]);
        for (double& g : ce.grad) g *= inv_batch;
        model.backward_from_logits(ce.grad);
    }

    double max_rel_err = 0.0;
    for (auto& [tensor, layer] : model.parameters()) {
        for (std::size_t i = 0; i < tensor->size(); ++i) {
            const double analytic = tensor->grad[i];
            const double saved = tensor->value[i];
            tensor->value[i] = saved + h;
            const double loss_plus = batch_loss(model, inputs, labels);
            tensor->value[i] = saved - h;
            const double loss_minus = batch_loss(model, inputs, labels);
            tensor->value[i] = saved;
            const double numeric = (loss_plus - loss_minus) / (2.0 * h);
            const double scale = std::max(std::abs(analytic), std::abs(numeric));
            if (scale < 1e-8) continue;  // both effectively zero
            max_rel_err = std::max(max_rel_err, std::abs(analytic - numeric) / std::max(scale, 1e-6));
        }
    }
    return max_rel_err;
}

namespace {

constexpr char kCheckpointMagic[8] = {'N', 'B', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model checkpoint " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(out, static_cast<std::int32_t>(model.input_channels()));
    write_pod(out, static_cast<std::int32_t>(model.input_length()));
    const auto& specs = model.specs();
    write_pod(out, static_cast<std::int32_t>(specs.size()));
    for (const auto& spec : specs) {
        write_pod(out, static_cast<std::int32_t>(spec.kind));
        write_pod(out, static_cast<std::int32_t>(spec.kernel));
        write_pod(out, static_cast<std::int32_t>(spec.out_channels));
        write_pod(out, static_cast<std::int32_t>(spec.stride));
        write_pod(out, static_cast<std::int32_t>(spec.padding));
    }
    const auto values = model.snapshot_values();
    write_pod(out, static_cast<std::int32_t>(values.size()));
    for (const auto& v : values) {
        write_pod(out, static_cast<std::int64_t>(v.size()));
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write failed for model checkpoint " + path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model checkpoint " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("bad model checkpoint magic in " + path);
    }
    std::int32_t in_channels = 0, in_length = 0, num_specs = 0;
    read_pod(in, in_channels);
    read_pod(in, in_length);
    read_pod(in, num_specs);
    std::vector<LayerSpec> specs;
    for (std::int32_t i = 0; i < num_specs; ++i) {
        std::int32_t kind = 0, kernel = 0, out_channels = 0, stride = 0, padding = 0;
        read_pod(in, kind);
        read_pod(in, kernel);
        read_pod(in, out_channels);
        read_pod(in, stride);
        read_pod(in, padding);
        specs.push_back(LayerSpec{static_cast<LayerKind>(kind), kernel, out_channels, stride,
                                  static_cast<Padding>(padding)});
    }
    Model model = Model::build(specs, in_channels, in_length, 0);
    std::int32_t num_tensors = 0;
    read_pod(in, num_tensors);
    std::vector<std::vector<double>> values;
    for (std::int32_t i = 0; i < num_tensors; ++i) {
        std::int64_t n = 0;
        read_pod(in, n);
        std::vector<double> v(static_cast<std::size_t>(n));
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
        values.push_back(std::move(v));
    }
    if (!in) throw std::runtime_error("truncated model checkpoint " + path);
    model.restore_values(values);
    return model;
}

}  // namespace noisebench::nn
