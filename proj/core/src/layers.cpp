#include "exposnet/layers.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "exposnet/blas.hpp"

namespace exposnet {

namespace {

// im2col for k=3, s=1, p=1: output is (c_in*9) x (H*W), one column per
// output pixel.
void im2col_3x3(const float* src, int c, int h, int w, float* col) {
    const int hw = h * w;
    for (int ci = 0; ci < c; ++ci) {
        const float* plane = src + static_cast<std::size_t>(ci) * hw;
        for (int ky = -1; ky <= 1; ++ky) {
            for (int kx = -1; kx <= 1; ++kx) {
                float* row = col + (static_cast<std::size_t>(ci) * 9 +
                                    (ky + 1) * 3 + (kx + 1)) *
                                       hw;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky;
                    float* dst = row + static_cast<std::size_t>(y) * w;
                    if (sy < 0 || sy >= h) {
                        std::memset(dst, 0, sizeof(float) * w);
                        continue;
                    }
                    const float* srow = plane + static_cast<std::size_t>(sy) * w;
                    int x0 = 0, x1 = w;
                    if (kx < 0) {
                        dst[0] = 0.0f;
                        x0 = 1;
                    } else if (kx > 0) {
                        dst[w - 1] = 0.0f;
                        x1 = w - 1;
                    }
                    for (int x = x0; x < x1; ++x) dst[x] = srow[x + kx];
                }
            }
        }
    }
}

// Transpose of im2col_3x3: accumulates columns back into the image.
void col2im_3x3(const float* col, int c, int h, int w, float* dst) {
    const int hw = h * w;
    std::memset(dst, 0, sizeof(float) * static_cast<std::size_t>(c) * hw);
    for (int ci = 0; ci < c; ++ci) {
        float* plane = dst + static_cast<std::size_t>(ci) * hw;
        for (int ky = -1; ky <= 1; ++ky) {
            for (int kx = -1; kx <= 1; ++kx) {
                const float* row = col + (static_cast<std::size_t>(ci) * 9 +
                                          (ky + 1) * 3 + (kx + 1)) *
                                             hw;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky;
                    if (sy < 0 || sy >= h) continue;
                    float* drow = plane + static_cast<std::size_t>(sy) * w;
                    const float* srow = row + static_cast<std::size_t>(y) * w;
                    int x0 = (kx < 0) ? 1 : 0;
                    int x1 = (kx > 0) ? w - 1 : w;
                    for (int x = x0; x < x1; ++x) drow[x + kx] += srow[x];
                }
            }
        }
    }
}

void check_4d(const Tensor& x, const char* who) {
    if (x.ndim() != 4)
        throw std::invalid_argument(std::string(who) + ": expected N x C x H x W, got " +
                                    x.shape_str());
}

}  // namespace

void he_uniform_init(Tensor& w, int fan_in, std::mt19937& rng) {
    const float limit = std::sqrt(6.0f / static_cast<float>(fan_in));
    std::uniform_real_distribution<float> dist(-limit, limit);
    for (float& v : w.data) v = dist(rng);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int c_in, int c_out)
    : weight({c_out, c_in, 3, 3}),
      bias({c_out}),
      weight_grad({c_out, c_in, 3, 3}),
      bias_grad({c_out}),
      c_in_(c_in),
      c_out_(c_out) {}

Tensor Conv2d::forward(const Tensor& x, Mode mode) {
    check_4d(x, "Conv2d");
    if (x.dim(1) != c_in_)
        throw std::invalid_argument("Conv2d: input has " + std::to_string(x.dim(1)) +
                                    " channels, expected " + std::to_string(c_in_));
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int hw = h * w, k = c_in_ * 9;
    in_shape_ = x.shape;
    const std::size_t col_sz = static_cast<std::size_t>(k) * hw;
    // Train mode keeps all column matrices for the backward pass; eval mode
    // reuses one scratch buffer (backward is only valid after a train pass).
    const bool keep = mode == Mode::kTrain;
    col_cache_.resize(keep ? col_sz * n : col_sz);
    Tensor y({n, c_out_, h, w});
    for (int i = 0; i < n; ++i) {
        float* col = col_cache_.data() + (keep ? col_sz * i : 0);
        im2col_3x3(&x.data[static_cast<std::size_t>(i) * c_in_ * hw], c_in_, h, w,
                   col);
        float* out = &y.data[static_cast<std::size_t>(i) * c_out_ * hw];
        sgemm(false, false, c_out_, hw, k, weight.data.data(), col, out);
        for (int co = 0; co < c_out_; ++co) {
            const float b = bias.data[co];
            float* plane = out + static_cast<std::size_t>(co) * hw;
            for (int p = 0; p < hw; ++p) plane[p] += b;
        }
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dout) {
    const int n = in_shape_[0], h = in_shape_[2], w = in_shape_[3];
    const int hw = h * w, k = c_in_ * 9;
    const std::size_t col_sz = static_cast<std::size_t>(k) * hw;
    if (col_cache_.size() != col_sz * n)
        throw std::logic_error("Conv2d::backward without a train-mode forward");
    Tensor dx(in_shape_);
    dcol_buf_.resize(col_sz);
    for (int i = 0; i < n; ++i) {
        const float* dy = &dout.data[static_cast<std::size_t>(i) * c_out_ * hw];
        // dW += dY * col^T with the column matrix cached by forward
        sgemm(false, true, c_out_, k, hw, dy, col_cache_.data() + col_sz * i,
              weight_grad.data.data(), true);
        for (int co = 0; co < c_out_; ++co) {
            const float* plane = dy + static_cast<std::size_t>(co) * hw;
            float s = 0.0f;
            for (int p = 0; p < hw; ++p) s += plane[p];
            bias_grad.data[co] += s;
        }
        // dX = col2im(W^T * dY)
        sgemm(true, false, k, hw, c_out_, weight.data.data(), dy,
              dcol_buf_.data());
        col2im_3x3(dcol_buf_.data(), c_in_, h, w,
                   &dx.data[static_cast<std::size_t>(i) * c_in_ * hw]);
    }
    return dx;
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight, &weight_grad});
    out.push_back({prefix + ".bias", &bias, &bias_grad});
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, float momentum, float eps)
    : gamma({channels}, 1.0f),
      beta({channels}),
      gamma_grad({channels}),
      beta_grad({channels}),
      running_mean({channels}),
      running_var({channels}, 1.0f),
      channels_(channels),
      momentum_(momentum),
      eps_(eps) {}

Tensor BatchNorm2d::forward(const Tensor& x, Mode mode) {
    check_4d(x, "BatchNorm2d");
    if (x.dim(1) != channels_)
        throw std::invalid_argument("BatchNorm2d: channel mismatch");
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    const std::size_t plane_stride = static_cast<std::size_t>(channels_) * hw;
    Tensor y(x.shape);

    if (mode == Mode::kTrain) {
        if (n < 2)
            throw std::invalid_argument("BatchNorm2d: train mode requires batch size >= 2");
        const double m = static_cast<double>(n) * hw;
        xhat_cache_ = Tensor(x.shape);
        inv_std_cache_.resize(channels_);
        for (int c = 0; c < channels_; ++c) {
            double sum = 0.0, sq = 0.0;
            for (int i = 0; i < n; ++i) {
                const float* p = &x.data[i * plane_stride + c * hw];
                for (std::size_t j = 0; j < hw; ++j) {
                    sum += p[j];
                    sq += static_cast<double>(p[j]) * p[j];
                }
            }
            const float mean = static_cast<float>(sum / m);
            const float var = static_cast<float>(sq / m - (sum / m) * (sum / m));
            const float inv_std = 1.0f / std::sqrt(std::max(var, 0.0f) + eps_);
            inv_std_cache_[c] = inv_std;
            // Cumulative averaging while a stats refresh is active (weight
            // 1/k for batch k), exponential averaging otherwise.
            const float mom = refresh_count_ >= 0
                                  ? 1.0f / static_cast<float>(refresh_count_ + 1)
                                  : momentum_;
            running_mean.data[c] =
                (1.0f - mom) * running_mean.data[c] + mom * mean;
            running_var.data[c] =
                (1.0f - mom) * running_var.data[c] + mom * std::max(var, 0.0f);
            const float g = gamma.data[c], b = beta.data[c];
            for (int i = 0; i < n; ++i) {
                const float* p = &x.data[i * plane_stride + c * hw];
                float* xh = &xhat_cache_.data[i * plane_stride + c * hw];
                float* q = &y.data[i * plane_stride + c * hw];
                for (std::size_t j = 0; j < hw; ++j) {
                    xh[j] = (p[j] - mean) * inv_std;
                    q[j] = g * xh[j] + b;
                }
            }
        }
        if (refresh_count_ >= 0) ++refresh_count_;
    } else {
        for (int c = 0; c < channels_; ++c) {
            const float inv_std = 1.0f / std::sqrt(running_var.data[c] + eps_);
            const float mean = running_mean.data[c];
            const float g = gamma.data[c], b = beta.data[c];
            for (int i = 0; i < n; ++i) {
                const float* p = &x.data[i * plane_stride + c * hw];
                float* q = &y.data[i * plane_stride + c * hw];
                for (std::size_t j = 0; j < hw; ++j)
                    q[j] = g * (p[j] - mean) * inv_std + b;
            }
        }
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& dout) {
    const int n = dout.dim(0), h = dout.dim(2), w = dout.dim(3);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    const std::size_t plane_stride = static_cast<std::size_t>(channels_) * hw;
    const double m = static_cast<double>(n) * hw;
    Tensor dx(dout.shape);
    for (int c = 0; c < channels_; ++c) {
        double dsum = 0.0, dxhat_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const float* dy = &dout.data[i * plane_stride + c * hw];
            const float* xh = &xhat_cache_.data[i * plane_stride + c * hw];
            for (std::size_t j = 0; j < hw; ++j) {
                dsum += dy[j];
                dxhat_sum += static_cast<double>(dy[j]) * xh[j];
            }
        }
        gamma_grad.data[c] += static_cast<float>(dxhat_sum);
        beta_grad.data[c] += static_cast<float>(dsum);
        const float g = gamma.data[c];
        const float inv_std = inv_std_cache_[c];
        const float k1 = static_cast<float>(dsum / m);
        const float k2 = static_cast<float>(dxhat_sum / m);
        for (int i = 0; i < n; ++i) {
            const float* dy = &dout.data[i * plane_stride + c * hw];
            const float* xh = &xhat_cache_.data[i * plane_stride + c * hw];
            float* q = &dx.data[i * plane_stride + c * hw];
            for (std::size_t j = 0; j < hw; ++j)
                q[j] = g * inv_std * (dy[j] - k1 - xh[j] * k2);
        }
    }
    return dx;
}

void BatchNorm2d::collect_params(const std::string& prefix,
                                 std::vector<ParamRef>& out) {
    out.push_back({prefix + ".gamma", &gamma, &gamma_grad});
    out.push_back({prefix + ".beta", &beta, &beta_grad});
}

void BatchNorm2d::collect_batchnorms(std::vector<BatchNorm2d*>& out) {
    out.push_back(this);
}

void BatchNorm2d::begin_stats_refresh() {
    running_mean.fill(0.0f);
    running_var.fill(0.0f);
    refresh_count_ = 0;
}

void BatchNorm2d::end_stats_refresh() { refresh_count_ = -1; }

// ---------------------------------------------------------------------------
// Elementwise activations

Tensor ReLU::forward(const Tensor& x, Mode) {
    Tensor y(x.shape);
    mask_.resize(x.numel());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        mask_[i] = x.data[i] > 0.0f;
        y.data[i] = mask_[i] ? x.data[i] : 0.0f;
    }
    return y;
}

Tensor ReLU::backward(const Tensor& dout) {
    Tensor dx(dout.shape);
    for (std::size_t i = 0; i < dout.numel(); ++i)
        dx.data[i] = mask_[i] ? dout.data[i] : 0.0f;
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x, Mode) {
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) y.data[i] = sigmoid(x.data[i]);
    out_cache_ = y;
    return y;
}

Tensor Sigmoid::backward(const Tensor& dout) {
    Tensor dx(dout.shape);
    for (std::size_t i = 0; i < dout.numel(); ++i) {
        const float s = out_cache_.data[i];
        dx.data[i] = dout.data[i] * s * (1.0f - s);
    }
    return dx;
}

Dropout::Dropout(float rate, uint64_t seed) : rate_(rate), rng_(seed) {
    if (rate < 0.0f || rate >= 1.0f)
        throw std::invalid_argument("Dropout: rate must be in [0, 1)");
}

Tensor Dropout::forward(const Tensor& x, Mode mode) {
    train_pass_ = (mode == Mode::kTrain && rate_ > 0.0f);
    if (!train_pass_) return x;
    const float scale = 1.0f / (1.0f - rate_);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    mask_.resize(x.numel());
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        mask_[i] = (u(rng_) < rate_) ? 0.0f : scale;
        y.data[i] = x.data[i] * mask_[i];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& dout) {
    if (!train_pass_) return dout;
    Tensor dx(dout.shape);
    for (std::size_t i = 0; i < dout.numel(); ++i)
        dx.data[i] = dout.data[i] * mask_[i];
    return dx;
}

// ---------------------------------------------------------------------------
// MaxPool2

Tensor MaxPool2::forward(const Tensor& x, Mode) {
    check_4d(x, "MaxPool2");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0)
        throw std::invalid_argument("MaxPool2: spatial extents must be even, got " +
                                    x.shape_str());
    in_shape_ = x.shape;
    const int oh = h / 2, ow = w / 2;
    Tensor y({n, c, oh, ow});
    argmax_.resize(y.numel());
    std::size_t o = 0;
    for (int i = 0; i < n; ++i) {
        for (int ci = 0; ci < c; ++ci) {
            const std::size_t base =
                (static_cast<std::size_t>(i) * c + ci) * h * w;
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    std::size_t best = base + (2 * oy) * w + 2 * ox;
                    float bv = x.data[best];
                    const std::size_t cand[3] = {best + 1, best + w, best + w + 1};
                    for (std::size_t idx : cand) {
                        if (x.data[idx] > bv) {
                            bv = x.data[idx];
                            best = idx;
                        }
                    }
                    y.data[o] = bv;
                    argmax_[o] = best;
                    ++o;
                }
            }
        }
    }
    return y;
}

Tensor MaxPool2::backward(const Tensor& dout) {
    Tensor dx(in_shape_);
    for (std::size_t o = 0; o < dout.numel(); ++o)
        dx.data[argmax_[o]] += dout.data[o];
    return dx;
}

// ---------------------------------------------------------------------------
// BilinearResize

BilinearResize::BilinearResize(int out_h, int out_w) : out_h_(out_h), out_w_(out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("BilinearResize: target extents must be >= 1");
}

Tensor BilinearResize::forward(const Tensor& x, Mode) {
    check_4d(x, "BilinearResize");
    in_shape_ = x.shape;
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    // Corner-aligned sampling
    const float sy = out_h_ > 1 ? static_cast<float>(h - 1) / (out_h_ - 1) : 0.0f;
    const float sx = out_w_ > 1 ? static_cast<float>(w - 1) / (out_w_ - 1) : 0.0f;
    Tensor y({n, c, out_h_, out_w_});
    for (int i = 0; i < n; ++i) {
        for (int ci = 0; ci < c; ++ci) {
            for (int oy = 0; oy < out_h_; ++oy) {
                const float fy = oy * sy;
                const int y0 = static_cast<int>(fy);
                const int y1 = std::min(y0 + 1, h - 1);
                const float wy = fy - y0;
                for (int ox = 0; ox < out_w_; ++ox) {
                    const float fx = ox * sx;
                    const int x0 = static_cast<int>(fx);
                    const int x1 = std::min(x0 + 1, w - 1);
                    const float wx = fx - x0;
                    const float v =
                        (1 - wy) * ((1 - wx) * x.at4(i, ci, y0, x0) +
                                    wx * x.at4(i, ci, y0, x1)) +
                        wy * ((1 - wx) * x.at4(i, ci, y1, x0) +
                              wx * x.at4(i, ci, y1, x1));
                    y.at4(i, ci, oy, ox) = v;
                }
            }
        }
    }
    return y;
}

Tensor BilinearResize::backward(const Tensor& dout) {
    Tensor dx(in_shape_);
    const int n = in_shape_[0], c = in_shape_[1], h = in_shape_[2], w = in_shape_[3];
    const float sy = out_h_ > 1 ? static_cast<float>(h - 1) / (out_h_ - 1) : 0.0f;
    const float sx = out_w_ > 1 ? static_cast<float>(w - 1) / (out_w_ - 1) : 0.0f;
    for (int i = 0; i < n; ++i) {
        for (int ci = 0; ci < c; ++ci) {
            for (int oy = 0; oy < out_h_; ++oy) {
                const float fy = oy * sy;
                const int y0 = static_cast<int>(fy);
                const int y1 = std::min(y0 + 1, h - 1);
                const float wy = fy - y0;
                for (int ox = 0; ox < out_w_; ++ox) {
                    const float fx = ox * sx;
                    const int x0 = static_cast<int>(fx);
                    const int x1 = std::min(x0 + 1, w - 1);
                    const float wx = fx - x0;
                    const float g = dout.at4(i, ci, oy, ox);
                    dx.at4(i, ci, y0, x0) += (1 - wy) * (1 - wx) * g;
                    dx.at4(i, ci, y0, x1) += (1 - wy) * wx * g;
                    dx.at4(i, ci, y1, x0) += wy * (1 - wx) * g;
                    dx.at4(i, ci, y1, x1) += wy * wx * g;
                }
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, Mode) {
    check_4d(x, "GlobalAvgPool");
    in_shape_ = x.shape;
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    Tensor y({n, c});
    for (int i = 0; i < n; ++i) {
        for (int ci = 0; ci < c; ++ci) {
            const float* p = &x.data[(static_cast<std::size_t>(i) * c + ci) * hw];
            double s = 0.0;
            for (std::size_t j = 0; j < hw; ++j) s += p[j];
            y.at2(i, ci) = static_cast<float>(s / hw);
        }
    }
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dout) {
    Tensor dx(in_shape_);
    const int n = in_shape_[0], c = in_shape_[1];
    const std::size_t hw = static_cast<std::size_t>(in_shape_[2]) * in_shape_[3];
    const float inv = 1.0f / static_cast<float>(hw);
    for (int i = 0; i < n; ++i) {
        for (int ci = 0; ci < c; ++ci) {
            const float g = dout.at2(i, ci) * inv;
            float* p = &dx.data[(static_cast<std::size_t>(i) * c + ci) * hw];
            for (std::size_t j = 0; j < hw; ++j) p[j] = g;
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in, int out)
    : weight({out, in}),
      bias({out}),
      weight_grad({out, in}),
      bias_grad({out}),
      in_(in),
      out_(out) {}

Tensor Linear::forward(const Tensor& x, Mode) {
    if (x.ndim() != 2 || x.dim(1) != in_)
        throw std::invalid_argument("Linear: expected N x " + std::to_string(in_) +
                                    ", got " + x.shape_str());
    input_cache_ = x;
    const int n = x.dim(0);
    Tensor y({n, out_});
    sgemm(false, true, n, out_, in_, x.data.data(), weight.data.data(),
          y.data.data());
    for (int i = 0; i < n; ++i)
        for (int o = 0; o < out_; ++o) y.at2(i, o) += bias.data[o];
    return y;
}

Tensor Linear::backward(const Tensor& dout) {
    const int n = dout.dim(0);
    // dW += dY^T * X
    sgemm(true, false, out_, in_, n, dout.data.data(), input_cache_.data.data(),
          weight_grad.data.data(), true);
    for (int i = 0; i < n; ++i)
        for (int o = 0; o < out_; ++o) bias_grad.data[o] += dout.at2(i, o);
    Tensor dx({n, in_});
    sgemm(false, false, n, in_, out_, dout.data.data(), weight.data.data(),
          dx.data.data());
    return dx;
}

void Linear::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight, &weight_grad});
    out.push_back({prefix + ".bias", &bias, &bias_grad});
}

// ---------------------------------------------------------------------------
// ConvBlock

ConvBlock::ConvBlock(int c_in, int c_out) : conv(c_in, c_out), bn(c_out) {}

Tensor ConvBlock::forward(const Tensor& x, Mode mode) {
    return relu.forward(bn.forward(conv.forward(x, mode), mode), mode);
}

Tensor ConvBlock::backward(const Tensor& dout) {
    return conv.backward(bn.backward(relu.backward(dout)));
}

void ConvBlock::collect_params(const std::string& prefix,
                               std::vector<ParamRef>& out) {
    conv.collect_params(prefix + ".conv", out);
    bn.collect_params(prefix + ".bn", out);
}

void ConvBlock::collect_batchnorms(std::vector<BatchNorm2d*>& out) {
    out.push_back(&bn);
}

}  // namespace exposnet
