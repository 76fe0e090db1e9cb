#include "exposnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "exposnet/io.hpp"

namespace exposnet {

using nlohmann::json;

std::string ModelConfig::to_json() const {
    json j;
    j["option"] = option == Option::kPerFrequency ? "per_frequency" : "total";
    j["n_bs_out"] = n_bs_out;
    j["n_bs_max"] = n_bs_max;
    j["h_bs"] = h_bs;
    j["fc_hidden"] = fc_hidden;
    j["dropout"] = dropout;
    j["seed"] = seed;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ModelConfig cfg;
    const std::string opt = j.at("option").get<std::string>();
    if (opt == "per_frequency")
        cfg.option = Option::kPerFrequency;
    else if (opt == "total")
        cfg.option = Option::kTotal;
    else
        throw DataError("ModelConfig: unknown option '" + opt + "'");
    cfg.n_bs_out = j.at("n_bs_out").get<int>();
    cfg.n_bs_max = j.at("n_bs_max").get<int>();
    cfg.h_bs = j.at("h_bs").get<int>();
    cfg.fc_hidden = j.at("fc_hidden").get<int>();
    cfg.dropout = j.at("dropout").get<float>();
    cfg.seed = j.at("seed").get<uint64_t>();
    if (cfg.n_bs_out < 1 || cfg.dropout < 0.0f || cfg.dropout >= 1.0f)
        throw DataError("ModelConfig: invalid n_bs_out or dropout");
    return cfg;
}

namespace {

Tensor slice_channels(const Tensor& x, int from, int count) {
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    Tensor y({n, count, h, w});
    for (int i = 0; i < n; ++i)
        std::copy_n(&x.data[(static_cast<std::size_t>(i) * x.dim(1) + from) * hw],
                    count * hw,
                    &y.data[static_cast<std::size_t>(i) * count * hw]);
    return y;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
    const int n = parts[0]->dim(0), h = parts[0]->dim(2), w = parts[0]->dim(3);
    int c_total = 0;
    for (const Tensor* p : parts) c_total += p->dim(1);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    Tensor y({n, c_total, h, w});
    for (int i = 0; i < n; ++i) {
        float* dst = &y.data[static_cast<std::size_t>(i) * c_total * hw];
        for (const Tensor* p : parts) {
            const std::size_t len = static_cast<std::size_t>(p->dim(1)) * hw;
            std::copy_n(&p->data[static_cast<std::size_t>(i) * len], len, dst);
            dst += len;
        }
    }
    return y;
}

// N x C x H x W times N x 1 x H x W, broadcast over channels.
Tensor broadcast_mul(const Tensor& feat, const Tensor& map1) {
    const int n = feat.dim(0), c = feat.dim(1), h = feat.dim(2), w = feat.dim(3);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    Tensor y(feat.shape);
    for (int i = 0; i < n; ++i) {
        const float* m = &map1.data[static_cast<std::size_t>(i) * hw];
        for (int ci = 0; ci < c; ++ci) {
            const std::size_t off = (static_cast<std::size_t>(i) * c + ci) * hw;
            for (std::size_t j = 0; j < hw; ++j)
                y.data[off + j] = feat.data[off + j] * m[j];
        }
    }
    return y;
}

// Gradient of broadcast_mul w.r.t. the single-channel map.
Tensor reduce_channels_mul(const Tensor& dout, const Tensor& feat) {
    const int n = dout.dim(0), c = dout.dim(1), h = dout.dim(2), w = dout.dim(3);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    Tensor dmap({n, 1, h, w});
    for (int i = 0; i < n; ++i) {
        float* m = &dmap.data[static_cast<std::size_t>(i) * hw];
        for (int ci = 0; ci < c; ++ci) {
            const std::size_t off = (static_cast<std::size_t>(i) * c + ci) * hw;
            for (std::size_t j = 0; j < hw; ++j)
                m[j] += dout.data[off + j] * feat.data[off + j];
        }
    }
    return dmap;
}

}  // namespace

// ---------------------------------------------------------------------------
// Branches

SatelliteBranch::SatelliteBranch()
    : ir_block1(3, 16),
      ir_block2(16, 32),
      lc_block(3, 16),
      lc_conv(16, 1),
      lc_resize(64, 64) {}

Tensor SatelliteBranch::forward(const Tensor& ir, const Tensor& lc, Mode mode) {
    feat_cache_ = ir_pool.forward(ir_block2.forward(ir_block1.forward(ir, mode), mode), mode);
    wmap_cache_ = lc_resize.forward(
        lc_sigmoid.forward(lc_conv.forward(lc_block.forward(lc, mode), mode), mode),
        mode);
    return broadcast_mul(feat_cache_, wmap_cache_);
}

void SatelliteBranch::backward(const Tensor& dout) {
    const Tensor dwmap = reduce_channels_mul(dout, feat_cache_);
    lc_block.backward(
        lc_conv.backward(lc_sigmoid.backward(lc_resize.backward(dwmap))));
    const Tensor dfeat = broadcast_mul(dout, wmap_cache_);
    ir_block1.backward(ir_block2.backward(ir_pool.backward(dfeat)));
}

void SatelliteBranch::collect_params(std::vector<ParamRef>& out) {
    ir_block1.collect_params("satellite.ir_block1", out);
    ir_block2.collect_params("satellite.ir_block2", out);
    lc_block.collect_params("satellite.lc_block", out);
    lc_conv.collect_params("satellite.lc_conv", out);
}

void SatelliteBranch::collect_batchnorms(std::vector<BatchNorm2d*>& out) {
    ir_block1.collect_batchnorms(out);
    ir_block2.collect_batchnorms(out);
    lc_block.collect_batchnorms(out);
}

BuildingBranch::BuildingBranch()
    : block1(1, 16), block2(16, 32), attn_block(32, 16), attn_conv(16, 1) {}

Tensor BuildingBranch::forward(const Tensor& bh, Mode mode) {
    feat_cache_ = pool.forward(block2.forward(block1.forward(bh, mode), mode), mode);
    amap_cache_ = attn_sigmoid.forward(
        attn_conv.forward(attn_block.forward(feat_cache_, mode), mode), mode);
    return broadcast_mul(feat_cache_, amap_cache_);
}

void BuildingBranch::backward(const Tensor& dout) {
    const Tensor damap = reduce_channels_mul(dout, feat_cache_);
    Tensor dfeat = attn_block.backward(
        attn_conv.backward(attn_sigmoid.backward(damap)));
    const Tensor direct = broadcast_mul(dout, amap_cache_);
    for (std::size_t i = 0; i < dfeat.numel(); ++i) dfeat.data[i] += direct.data[i];
    block1.backward(block2.backward(pool.backward(dfeat)));
}

void BuildingBranch::collect_params(std::vector<ParamRef>& out) {
    block1.collect_params("building.block1", out);
    block2.collect_params("building.block2", out);
    attn_block.collect_params("building.attn_block", out);
    attn_conv.collect_params("building.attn_conv", out);
}

void BuildingBranch::collect_batchnorms(std::vector<BatchNorm2d*>& out) {
    block1.collect_batchnorms(out);
    block2.collect_batchnorms(out);
    attn_block.collect_batchnorms(out);
}

AntennaBranch::AntennaBranch() : block1(7, 32), block2(32, 64) {}

Tensor AntennaBranch::forward(const Tensor& rad, Mode mode) {
    return block2.forward(pool.forward(block1.forward(rad, mode), mode), mode);
}

void AntennaBranch::backward(const Tensor& dout) {
    block1.backward(pool.backward(block2.backward(dout)));
}

void AntennaBranch::collect_params(std::vector<ParamRef>& out) {
    block1.collect_params("antenna.block1", out);
    block2.collect_params("antenna.block2", out);
}

void AntennaBranch::collect_batchnorms(std::vector<BatchNorm2d*>& out) {
    block1.collect_batchnorms(out);
    block2.collect_batchnorms(out);
}

BaseStationBranch::BaseStationBranch(int n_bs_max, int h_bs, int n_bs_out)
    : fc1(n_bs_max, h_bs),
      fc2(h_bs, n_bs_out),
      n_bs_max_(n_bs_max),
      n_bs_out_(n_bs_out) {}

Tensor BaseStationBranch::forward(const std::vector<std::vector<float>>& heights,
                                  Mode mode) {
    const int n = static_cast<int>(heights.size());
    Tensor padded({n, n_bs_max_});
    resampled_cache_ = Tensor({n, n_bs_out_});
    for (int i = 0; i < n; ++i) {
        std::vector<float> h = heights[i];
        std::sort(h.begin(), h.end(), std::greater<float>());
        if (static_cast<int>(h.size()) > n_bs_max_) h.resize(n_bs_max_);
        for (std::size_t k = 0; k < h.size(); ++k) padded.at2(i, static_cast<int>(k)) = h[k];
        // Expand the height vector to n_bs_out by linear interpolation;
        // an empty list leaves the zero vector in place.
        const int m = static_cast<int>(h.size());
        if (m == 1) {
            for (int j = 0; j < n_bs_out_; ++j) resampled_cache_.at2(i, j) = h[0];
        } else if (m >= 2) {
            for (int j = 0; j < n_bs_out_; ++j) {
                const float pos = n_bs_out_ > 1
                                      ? static_cast<float>(j) * (m - 1) / (n_bs_out_ - 1)
                                      : 0.0f;
                const int lo = static_cast<int>(pos);
                const int hi = std::min(lo + 1, m - 1);
                const float w = pos - lo;
                resampled_cache_.at2(i, j) = h[lo] + w * (h[hi] - h[lo]);
            }
        }
    }
    weights_cache_ = sigmoid.forward(
        fc2.forward(relu.forward(fc1.forward(padded, mode), mode), mode), mode);
    Tensor out({n, n_bs_out_});
    for (std::size_t i = 0; i < out.numel(); ++i)
        out.data[i] = resampled_cache_.data[i] * weights_cache_.data[i];
    return out;
}

void BaseStationBranch::backward(const Tensor& dout) {
    Tensor dw(dout.shape);
    for (std::size_t i = 0; i < dout.numel(); ++i)
        dw.data[i] = dout.data[i] * resampled_cache_.data[i];
    fc1.backward(relu.backward(fc2.backward(sigmoid.backward(dw))));
}

void BaseStationBranch::collect_params(std::vector<ParamRef>& out) {
    fc1.collect_params("base_station.fc1", out);
    fc2.collect_params("base_station.fc2", out);
}

SpatialFusion::SpatialFusion()
    : b1(128, 256), b2(256, 512), b3(512, 1024), b4(1024, 1024) {}

Tensor SpatialFusion::forward(const Tensor& x, Mode mode) {
    Tensor t = p1.forward(b1.forward(x, mode), mode);
    t = p2.forward(b2.forward(t, mode), mode);
    t = p3.forward(b3.forward(t, mode), mode);
    return p4.forward(b4.forward(t, mode), mode);
}

Tensor SpatialFusion::backward(const Tensor& dout) {
    Tensor t = b4.backward(p4.backward(dout));
    t = b3.backward(p3.backward(t));
    t = b2.backward(p2.backward(t));
    return b1.backward(p1.backward(t));
}

void SpatialFusion::collect_params(std::vector<ParamRef>& out) {
    b1.collect_params("fusion.b1", out);
    b2.collect_params("fusion.b2", out);
    b3.collect_params("fusion.b3", out);
    b4.collect_params("fusion.b4", out);
}

void SpatialFusion::collect_batchnorms(std::vector<BatchNorm2d*>& out) {
    b1.collect_batchnorms(out);
    b2.collect_batchnorms(out);
    b3.collect_batchnorms(out);
    b4.collect_batchnorms(out);
}

FrequencyBranch::FrequencyBranch() : b1(1024, 512), b2(512, 256), b3(256, 128) {}

Tensor FrequencyBranch::forward(const Tensor& fused, Mode mode) {
    return gap.forward(
        b3.forward(b2.forward(b1.forward(fused, mode), mode), mode), mode);
}

Tensor FrequencyBranch::backward(const Tensor& dout) {
    return b1.backward(b2.backward(b3.backward(gap.backward(dout))));
}

void FrequencyBranch::collect_params(std::vector<ParamRef>& out) {
    b1.collect_params("freq.b1", out);
    b2.collect_params("freq.b2", out);
    b3.collect_params("freq.b3", out);
}

void FrequencyBranch::collect_batchnorms(std::vector<BatchNorm2d*>& out) {
    b1.collect_batchnorms(out);
    b2.collect_batchnorms(out);
    b3.collect_batchnorms(out);
}

OutputBranch::OutputBranch(int in_dim, int hidden, float dropout_rate,
                           uint64_t seed)
    : rms_fc1(in_dim, hidden),
      rms_fc2(hidden, 1),
      rms_dropout(dropout_rate, seed),
      std_fc1(in_dim, hidden),
      std_fc2(hidden, 1),
      std_dropout(dropout_rate, seed + 1) {}

Tensor OutputBranch::forward(const Tensor& x, Mode mode) {
    const Tensor r = rms_fc2.forward(
        rms_dropout.forward(rms_relu.forward(rms_fc1.forward(x, mode), mode), mode),
        mode);
    const Tensor s = std_fc2.forward(
        std_dropout.forward(std_relu.forward(std_fc1.forward(x, mode), mode), mode),
        mode);
    const int n = x.dim(0);
    Tensor out({n, 2});
    for (int i = 0; i < n; ++i) {
        out.at2(i, 0) = r.at2(i, 0);
        out.at2(i, 1) = s.at2(i, 0);
    }
    return out;
}

Tensor OutputBranch::backward(const Tensor& dout) {
    const int n = dout.dim(0);
    Tensor dr({n, 1}), ds({n, 1});
    for (int i = 0; i < n; ++i) {
        dr.at2(i, 0) = dout.at2(i, 0);
        ds.at2(i, 0) = dout.at2(i, 1);
    }
    Tensor dx = rms_fc1.backward(
        rms_relu.backward(rms_dropout.backward(rms_fc2.backward(dr))));
    const Tensor dx2 = std_fc1.backward(
        std_relu.backward(std_dropout.backward(std_fc2.backward(ds))));
    for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] += dx2.data[i];
    return dx;
}

void OutputBranch::collect_params(std::vector<ParamRef>& out) {
    rms_fc1.collect_params("out.rms_fc1", out);
    rms_fc2.collect_params("out.rms_fc2", out);
    std_fc1.collect_params("out.std_fc1", out);
    std_fc2.collect_params("out.std_fc2", out);
}

// ---------------------------------------------------------------------------
// ExposNet

ExposNet::ExposNet(ModelConfig cfg)
    : cfg_(cfg), base_station_(cfg.n_bs_max, cfg.h_bs, cfg.n_bs_out) {
    const int n_heads = cfg.option == ModelConfig::Option::kPerFrequency ? kNumBands : 1;
    const int in_dim = 128 + cfg.n_bs_out;
    for (int h = 0; h < n_heads; ++h)
        heads_.push_back(std::make_unique<HeadPair>(
            in_dim, cfg.fc_hidden, cfg.dropout, cfg.seed * 1000003ULL + 17 + 2 * h));

    // Seeded He-uniform init for conv/FC weights; biases and BN stay at their
    // constructor defaults. The final FC of each regression head stays zero
    // so an untrained model predicts zero field: with short training budgets
    // every optimizer step then goes toward the targets instead of first
    // unwinding a random output distribution.
    auto ends_with = [](const std::string& s, const char* suf) {
        const std::size_t n = std::char_traits<char>::length(suf);
        return s.size() >= n && s.compare(s.size() - n, n, suf) == 0;
    };
    std::mt19937 rng(static_cast<uint32_t>(cfg.seed ^ 0x9e3779b9ULL));
    for (ParamRef& p : params()) {
        if (ends_with(p.name, "rms_fc2.weight") ||
            ends_with(p.name, "std_fc2.weight"))
            continue;
        if (ends_with(p.name, ".weight")) {
            int fan_in = 1;
            for (std::size_t d = 1; d < p.value->shape.size(); ++d)
                fan_in *= p.value->shape[d];
            he_uniform_init(*p.value, fan_in, rng);
        }
    }
}

Tensor ExposNet::forward(const Tensor& x,
                         const std::vector<std::vector<float>>& heights,
                         Mode mode) {
    if (x.ndim() != 4 || x.dim(1) != kInputChannels || x.dim(2) != kTileGrid ||
        x.dim(3) != kTileGrid)
        throw std::invalid_argument("ExposNet: expected N x 15 x 128 x 128, got " +
                                    x.shape_str());
    if (heights.size() != static_cast<std::size_t>(x.dim(0)))
        throw std::invalid_argument("ExposNet: heights list size != batch size");
    batch_cache_ = x.dim(0);

    const Tensor sat =
        satellite_.forward(slice_channels(x, 0, 3), slice_channels(x, 3, 3), mode);
    const Tensor bld = building_.forward(slice_channels(x, 6, 1), mode);
    const Tensor ant = antenna_.forward(slice_channels(x, 8, 7), mode);
    bs_cache_ = base_station_.forward(heights, mode);
    const Tensor fused =
        fusion_.forward(concat_channels({&sat, &bld, &ant}), mode);

    const int n = batch_cache_;
    const int n_heads = static_cast<int>(heads_.size());
    Tensor pred(n_heads == 1 ? std::vector<int>{n, 2}
                             : std::vector<int>{n, n_heads, 2});
    for (int h = 0; h < n_heads; ++h) {
        const Tensor feat = heads_[h]->freq.forward(fused, mode);
        Tensor in({n, 128 + cfg_.n_bs_out});
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 128; ++j) in.at2(i, j) = feat.at2(i, j);
            for (int j = 0; j < cfg_.n_bs_out; ++j)
                in.at2(i, 128 + j) = bs_cache_.at2(i, j);
        }
        const Tensor out = heads_[h]->out.forward(in, mode);
        for (int i = 0; i < n; ++i) {
            if (n_heads == 1) {
                pred.at2(i, 0) = out.at2(i, 0);
                pred.at2(i, 1) = out.at2(i, 1);
            } else {
                pred.data[(static_cast<std::size_t>(i) * n_heads + h) * 2] = out.at2(i, 0);
                pred.data[(static_cast<std::size_t>(i) * n_heads + h) * 2 + 1] =
                    out.at2(i, 1);
            }
        }
    }
    return pred;
}

void ExposNet::backward(const Tensor& dpred) {
    const int n = batch_cache_;
    const int n_heads = static_cast<int>(heads_.size());
    Tensor dfused;
    Tensor dbs({n, cfg_.n_bs_out});
    for (int h = 0; h < n_heads; ++h) {
        Tensor dout({n, 2});
        for (int i = 0; i < n; ++i) {
            if (n_heads == 1) {
                dout.at2(i, 0) = dpred.at2(i, 0);
                dout.at2(i, 1) = dpred.at2(i, 1);
            } else {
                dout.at2(i, 0) =
                    dpred.data[(static_cast<std::size_t>(i) * n_heads + h) * 2];
                dout.at2(i, 1) =
                    dpred.data[(static_cast<std::size_t>(i) * n_heads + h) * 2 + 1];
            }
        }
        const Tensor din = heads_[h]->out.backward(dout);
        Tensor dfeat({n, 128});
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 128; ++j) dfeat.at2(i, j) = din.at2(i, j);
            for (int j = 0; j < cfg_.n_bs_out; ++j)
                dbs.at2(i, j) += din.at2(i, 128 + j);
        }
        const Tensor df = heads_[h]->freq.backward(dfeat);
        if (dfused.numel() == 0) {
            dfused = df;
        } else {
            for (std::size_t i = 0; i < dfused.numel(); ++i)
                dfused.data[i] += df.data[i];
        }
    }
    base_station_.backward(dbs);
    const Tensor dconcat = fusion_.backward(dfused);
    satellite_.backward(slice_channels(dconcat, 0, 32));
    building_.backward(slice_channels(dconcat, 32, 32));
    antenna_.backward(slice_channels(dconcat, 64, 64));
}

std::vector<ParamRef> ExposNet::params() {
    std::vector<ParamRef> out;
    satellite_.collect_params(out);
    building_.collect_params(out);
    antenna_.collect_params(out);
    base_station_.collect_params(out);
    fusion_.collect_params(out);
    for (std::size_t h = 0; h < heads_.size(); ++h) {
        std::vector<ParamRef> head;
        heads_[h]->freq.collect_params(head);
        heads_[h]->out.collect_params(head);
        for (ParamRef& p : head) {
            p.name = "head" + std::to_string(h) + "." + p.name;
            out.push_back(p);
        }
    }
    return out;
}

std::vector<BatchNorm2d*> ExposNet::batchnorms() {
    std::vector<BatchNorm2d*> out;
    satellite_.collect_batchnorms(out);
    building_.collect_batchnorms(out);
    antenna_.collect_batchnorms(out);
    fusion_.collect_batchnorms(out);
    for (auto& head : heads_) head->freq.collect_batchnorms(out);
    return out;
}

void ExposNet::zero_grad() {
    for (ParamRef& p : params()) p.grad->fill(0.0f);
}

std::size_t ExposNet::parameter_count() {
    std::size_t n = 0;
    for (const ParamRef& p : params()) n += p.value->numel();
    return n;
}

std::string ExposNet::summary() {
    std::ostringstream os;
    os << "ExposNet option="
       << (cfg_.option == ModelConfig::Option::kPerFrequency ? "per_frequency"
                                                             : "total")
       << " heads=" << heads_.size() << " parameters=" << parameter_count()
       << "\n";
    for (const ParamRef& p : params())
        os << "  " << p.name << " " << p.value->shape_str() << "\n";
    return os.str();
}

Tensor clamp_predictions(const Tensor& pred) {
    Tensor out = pred;
    for (float& v : out.data) v = std::max(v, 0.0f);
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint IO

namespace {
constexpr char kModelMagic[4] = {'E', 'X', 'P', 'M'};
constexpr uint16_t kModelVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, ExposNet& model,
                     const NormStats& stats) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f.write(kModelMagic, 4);
    const uint16_t version = kModelVersion;
    f.write(reinterpret_cast<const char*>(&version), sizeof(version));
    json meta;
    meta["config"] = json::parse(model.config().to_json());
    meta["norm_stats"] = json::parse(stats.to_json());
    const std::string meta_str = meta.dump();
    const uint32_t meta_len = static_cast<uint32_t>(meta_str.size());
    f.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
    f.write(meta_str.data(), meta_len);
    auto params = model.params();
    const uint32_t n_params = static_cast<uint32_t>(params.size());
    f.write(reinterpret_cast<const char*>(&n_params), sizeof(n_params));
    for (const ParamRef& p : params) {
        const uint32_t name_len = static_cast<uint32_t>(p.name.size());
        f.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
        f.write(p.name.data(), name_len);
        const uint64_t count = p.value->numel();
        f.write(reinterpret_cast<const char*>(&count), sizeof(count));
        f.write(reinterpret_cast<const char*>(p.value->data.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
    }
    // Batch-norm running statistics are model state too: without them an
    // eval-mode forward after loading would normalize with the defaults.
    auto bns = model.batchnorms();
    const uint32_t n_bns = static_cast<uint32_t>(bns.size());
    f.write(reinterpret_cast<const char*>(&n_bns), sizeof(n_bns));
    for (const BatchNorm2d* bn : bns) {
        const uint64_t count = bn->running_mean.numel();
        f.write(reinterpret_cast<const char*>(&count), sizeof(count));
        f.write(reinterpret_cast<const char*>(bn->running_mean.data.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
        f.write(reinterpret_cast<const char*>(bn->running_var.data.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
    }
    if (!f) throw DataError("write failed: " + path);
}

ExposNet load_checkpoint(const std::string& path, NormStats& stats) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kModelMagic, 4) != 0)
        throw DataError("bad checkpoint magic in " + path);
    uint16_t version = 0;
    f.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (version != kModelVersion)
        throw DataError("unsupported checkpoint version in " + path);
    uint32_t meta_len = 0;
    f.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
    std::string meta_str(meta_len, '\0');
    f.read(meta_str.data(), meta_len);
    json meta = json::parse(meta_str);
    ExposNet model(ModelConfig::from_json(meta.at("config").dump()));
    stats = NormStats::from_json(meta.at("norm_stats").dump());
    uint32_t n_params = 0;
    f.read(reinterpret_cast<char*>(&n_params), sizeof(n_params));
    auto params = model.params();
    if (n_params != params.size())
        throw DataError("checkpoint parameter count mismatch in " + path);
    for (ParamRef& p : params) {
        uint32_t name_len = 0;
        f.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        if (name != p.name)
            throw DataError("checkpoint parameter order mismatch: " + name +
                            " vs " + p.name);
        uint64_t count = 0;
        f.read(reinterpret_cast<char*>(&count), sizeof(count));
        if (count != p.value->numel())
            throw DataError("checkpoint parameter size mismatch for " + name);
        f.read(reinterpret_cast<char*>(p.value->data.data()),
               static_cast<std::streamsize>(count * sizeof(float)));
    }
    uint32_t n_bns = 0;
    f.read(reinterpret_cast<char*>(&n_bns), sizeof(n_bns));
    auto bns = model.batchnorms();
    if (n_bns != bns.size())
        throw DataError("checkpoint batch-norm count mismatch in " + path);
    for (BatchNorm2d* bn : bns) {
        uint64_t count = 0;
        f.read(reinterpret_cast<char*>(&count), sizeof(count));
        if (count != bn->running_mean.numel())
            throw DataError("checkpoint batch-norm size mismatch in " + path);
        f.read(reinterpret_cast<char*>(bn->running_mean.data.data()),
               static_cast<std::streamsize>(count * sizeof(float)));
        f.read(reinterpret_cast<char*>(bn->running_var.data.data()),
               static_cast<std::streamsize>(count * sizeof(float)));
    }
    if (!f) throw DataError("truncated checkpoint " + path);
    return model;
}

}  // namespace exposnet
