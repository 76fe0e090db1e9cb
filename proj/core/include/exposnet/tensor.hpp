#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace exposnet {

/// Dense row-major float tensor. Images are stored channel-major (C x H x W),
/// batches as N x C x H x W.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> s)
        : shape(std::move(s)), data(numel_of(shape), 0.0f) {}

    Tensor(std::vector<int> s, float fill)
        : shape(std::move(s)), data(numel_of(shape), fill) {}

    Tensor(std::vector<int> s, std::vector<float> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape))
            throw std::invalid_argument("Tensor: data length does not match shape");
    }

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int e : s) {
            if (e < 0) throw std::invalid_argument("Tensor: negative extent");
            n *= static_cast<std::size_t>(e);
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
    int ndim() const { return static_cast<int>(shape.size()); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }

    // N x C x H x W indexing
    float& at4(int n, int c, int y, int x) {
        const int C = shape[1], H = shape[2], W = shape[3];
        return data[((static_cast<std::size_t>(n) * C + c) * H + y) * W + x];
    }
    float at4(int n, int c, int y, int x) const {
        const int C = shape[1], H = shape[2], W = shape[3];
        return data[((static_cast<std::size_t>(n) * C + c) * H + y) * W + x];
    }

    // N x F indexing
    float& at2(int n, int f) {
        return data[static_cast<std::size_t>(n) * shape[1] + f];
    }
    float at2(int n, int f) const {
        return data[static_cast<std::size_t>(n) * shape[1] + f];
    }

    void fill(float v) { std::fill(data.begin(), data.end(), v); }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

inline bool all_finite(const Tensor& t) {
    for (float v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace exposnet
