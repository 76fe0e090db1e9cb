#pragma once

#include <memory>
#include <string>
#include <vector>

#include "exposnet/adam.hpp"
#include "exposnet/dataset.hpp"
#include "exposnet/layers.hpp"
#include "exposnet/tensor.hpp"

namespace exposnet {

struct ModelConfig {
    enum class Option { kPerFrequency, kTotal };

    Option option = Option::kTotal;
    int n_bs_out = 16;  // base-station branch output length
    int n_bs_max = 32;  // padded BSA count fed to the first FC layer
    int h_bs = 32;      // base-station branch hidden width
    int fc_hidden = 64; // output-branch hidden width
    float dropout = 0.3f;
    uint64_t seed = 0;

    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

/// Satellite branch: IR through two conv blocks and a max pool; the land
/// cover map produces a single-channel sigmoid weight map (resized to 64x64)
/// that multiplicatively gates the IR features. Output N x 32 x 64 x 64.
struct SatelliteBranch {
    SatelliteBranch();
    ConvBlock ir_block1, ir_block2;
    MaxPool2 ir_pool;
    ConvBlock lc_block;
    Conv2d lc_conv;
    Sigmoid lc_sigmoid;
    BilinearResize lc_resize;

    Tensor forward(const Tensor& ir, const Tensor& lc, Mode mode);
    void backward(const Tensor& dout);
    void collect_params(std::vector<ParamRef>& out);
    void collect_batchnorms(std::vector<BatchNorm2d*>& out);

    Tensor feat_cache_, wmap_cache_;
};

/// Building branch: two conv blocks, max pool, then a spatial attention map
/// multiplied onto the features. Output N x 32 x 64 x 64.
struct BuildingBranch {
    BuildingBranch();
    ConvBlock block1, block2;
    MaxPool2 pool;
    ConvBlock attn_block;
    Conv2d attn_conv;
    Sigmoid attn_sigmoid;

    Tensor forward(const Tensor& bh, Mode mode);
    void backward(const Tensor& dout);
    void collect_params(std::vector<ParamRef>& out);
    void collect_batchnorms(std::vector<BatchNorm2d*>& out);

    Tensor feat_cache_, amap_cache_;
};

/// Antenna branch: conv block, max pool, conv block. Output N x 64 x 64 x 64.
struct AntennaBranch {
    AntennaBranch();
    ConvBlock block1;
    MaxPool2 pool;
    ConvBlock block2;

    Tensor forward(const Tensor& rad, Mode mode);
    void backward(const Tensor& dout);
    void collect_params(std::vector<ParamRef>& out);
    void collect_batchnorms(std::vector<BatchNorm2d*>& out);
};

/// Base-station branch: the nonzero (normalized) BSA heights, sorted
/// descending and padded to n_bs_max, pass through two FC layers and a
/// sigmoid to produce attention weights; the height vector is resampled to
/// n_bs_out by linear interpolation and gated by the weights. An empty height
/// list yields the zero vector.
struct BaseStationBranch {
    BaseStationBranch(int n_bs_max, int h_bs, int n_bs_out);
    Linear fc1, fc2;
    ReLU relu;
    Sigmoid sigmoid;
    int n_bs_max_, n_bs_out_;

    Tensor forward(const std::vector<std::vector<float>>& heights, Mode mode);
    void backward(const Tensor& dout);
    void collect_params(std::vector<ParamRef>& out);

    Tensor resampled_cache_, weights_cache_;
};

/// Spatial fusion: four conv block + max pool stages,
/// 128 x 64 x 64 -> 1024 x 4 x 4 (channels 256 -> 512 -> 1024 -> 1024).
struct SpatialFusion {
    SpatialFusion();
    ConvBlock b1, b2, b3, b4;
    MaxPool2 p1, p2, p3, p4;

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& dout);
    void collect_params(std::vector<ParamRef>& out);
    void collect_batchnorms(std::vector<BatchNorm2d*>& out);
};

/// Frequency-specific branch: three conv blocks (512 -> 256 -> 128) and a
/// global average pool, yielding a 128-element feature vector.
struct FrequencyBranch {
    FrequencyBranch();
    ConvBlock b1, b2, b3;
    GlobalAvgPool gap;

    Tensor forward(const Tensor& fused, Mode mode);
    Tensor backward(const Tensor& dout);
    void collect_params(std::vector<ParamRef>& out);
    void collect_batchnorms(std::vector<BatchNorm2d*>& out);
};

/// Output branch: two parallel FC sub-branches (RMS and STD), each
/// FC -> ReLU -> dropout -> FC(1), fed by the concatenated frequency feature
/// and base-station vector.
struct OutputBranch {
    OutputBranch(int in_dim, int hidden, float dropout_rate, uint64_t seed);
    Linear rms_fc1, rms_fc2;
    ReLU rms_relu;
    Dropout rms_dropout;
    Linear std_fc1, std_fc2;
    ReLU std_relu;
    Dropout std_dropout;

    /// Input N x (128 + n_bs_out); output N x 2 (raw, unclamped).
    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& dout);
    void collect_params(std::vector<ParamRef>& out);
};

class ExposNet {
public:
    explicit ExposNet(ModelConfig cfg);

    /// x: N x 15 x 128 x 128 (normalized); heights: per-sample normalized
    /// nonzero BSA heights. Returns N x 7 x 2 (per-frequency) or N x 2
    /// (total option). Raw linear outputs; clamp at 0 only when reporting.
    Tensor forward(const Tensor& x,
                   const std::vector<std::vector<float>>& heights, Mode mode);

    /// Accumulates parameter gradients for the last forward pass.
    void backward(const Tensor& dpred);

    std::vector<ParamRef> params();
    std::vector<BatchNorm2d*> batchnorms();
    void zero_grad();
    std::size_t parameter_count();
    std::string summary();

    const ModelConfig& config() const { return cfg_; }

private:
    ModelConfig cfg_;
    SatelliteBranch satellite_;
    BuildingBranch building_;
    AntennaBranch antenna_;
    BaseStationBranch base_station_;
    SpatialFusion fusion_;
    struct HeadPair {
        FrequencyBranch freq;
        OutputBranch out;
        HeadPair(int in_dim, int hidden, float rate, uint64_t seed)
            : out(in_dim, hidden, rate, seed) {}
    };
    std::vector<std::unique_ptr<HeadPair>> heads_;
    Tensor bs_cache_;
    int batch_cache_ = 0;
};

/// Non-negative prediction for reporting: raw outputs clamped at 0.
Tensor clamp_predictions(const Tensor& pred);

// Checkpoint: magic "EXPM", version, a JSON block with the model config and
// the normalization stats used at train time, then named f32 parameter arrays.
void save_checkpoint(const std::string& path, ExposNet& model,
                     const NormStats& stats);
ExposNet load_checkpoint(const std::string& path, NormStats& stats);

}  // namespace exposnet
