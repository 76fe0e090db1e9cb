#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "exposnet/tensor.hpp"

namespace exposnet {

enum class Mode { kTrain, kEval };

/// Reference to one learnable parameter tensor and its gradient buffer.
struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

class BatchNorm2d;

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, Mode mode) = 0;
    virtual Tensor backward(const Tensor& dout) = 0;
    virtual void collect_params(const std::string& prefix,
                                std::vector<ParamRef>& out) {}
    virtual void collect_batchnorms(std::vector<BatchNorm2d*>& out) {}
};

/// 3x3 convolution, stride 1, one-pixel zero padding. Spatial dims are
/// preserved exactly. Input N x C_in x H x W, output N x C_out x H x W.
class Conv2d : public Layer {
public:
    Conv2d(int c_in, int c_out);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;
    void collect_params(const std::string& prefix,
                        std::vector<ParamRef>& out) override;

    Tensor weight;  // c_out x c_in x 3 x 3
    Tensor bias;    // c_out
    Tensor weight_grad;
    Tensor bias_grad;

private:
    int c_in_, c_out_;
    std::vector<int> in_shape_;
    // Column matrices from the last train-mode forward pass, reused for the
    // weight gradient instead of recomputing im2col in backward.
    std::vector<float> col_cache_;
    std::vector<float> dcol_buf_;
};

/// Per-channel batch normalization over N x C x H x W.
/// Train mode uses batch statistics and updates running stats; eval mode uses
/// the stored running stats only. Train mode requires batch size >= 2.
class BatchNorm2d : public Layer {
public:
    explicit BatchNorm2d(int channels, float momentum = 0.1f, float eps = 1e-5f);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;
    void collect_params(const std::string& prefix,
                        std::vector<ParamRef>& out) override;
    void collect_batchnorms(std::vector<BatchNorm2d*>& out) override;

    /// Switch the running statistics to a cumulative average over the train
    /// forwards that follow: batch k contributes with weight 1/k, so one
    /// sweep over the data yields the exact mean of the batch statistics at
    /// the current weights. end_stats_refresh() restores the usual
    /// exponential average.
    void begin_stats_refresh();
    void end_stats_refresh();

    Tensor gamma, beta;
    Tensor gamma_grad, beta_grad;
    Tensor running_mean, running_var;

private:
    int channels_;
    float momentum_, eps_;
    int refresh_count_ = -1;  // -1: exponential mode, >= 0: batches averaged
    Tensor xhat_cache_;
    std::vector<float> inv_std_cache_;
};

class ReLU : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;

private:
    std::vector<uint8_t> mask_;
};

class Sigmoid : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;

private:
    Tensor out_cache_;
};

/// Inverted dropout: train mode zeroes each element with probability `rate`
/// and scales survivors by 1/(1-rate); eval mode is the identity.
class Dropout : public Layer {
public:
    Dropout(float rate, uint64_t seed);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;

private:
    float rate_;
    std::mt19937 rng_;
    std::vector<float> mask_;
    bool train_pass_ = false;
};

/// 2x2 max pooling with stride 2. Requires even spatial extents.
class MaxPool2 : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;

private:
    std::vector<int> in_shape_;
    std::vector<std::size_t> argmax_;
};

/// Corner-aligned bilinear resize to a fixed target size.
class BilinearResize : public Layer {
public:
    BilinearResize(int out_h, int out_w);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;

private:
    int out_h_, out_w_;
    std::vector<int> in_shape_;
};

/// N x C x H x W -> N x C, each element the mean over H x W.
class GlobalAvgPool : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;

private:
    std::vector<int> in_shape_;
};

/// Fully connected affine map. Input N x in, output N x out.
class Linear : public Layer {
public:
    Linear(int in, int out);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;
    void collect_params(const std::string& prefix,
                        std::vector<ParamRef>& out) override;

    Tensor weight;  // out x in
    Tensor bias;    // out
    Tensor weight_grad;
    Tensor bias_grad;

private:
    int in_, out_;
    Tensor input_cache_;
};

/// Conv -> BN -> ReLU, the repeated unit of all convolutional stages.
class ConvBlock : public Layer {
public:
    ConvBlock(int c_in, int c_out);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dout) override;
    void collect_params(const std::string& prefix,
                        std::vector<ParamRef>& out) override;
    void collect_batchnorms(std::vector<BatchNorm2d*>& out) override;

    Conv2d conv;
    BatchNorm2d bn;
    ReLU relu;
};

// Standalone activation helpers.
inline float relu(float x) { return x > 0.0f ? x : 0.0f; }
inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

/// He-uniform initialization of a weight tensor with the given fan-in.
void he_uniform_init(Tensor& w, int fan_in, std::mt19937& rng);

}  // namespace exposnet
