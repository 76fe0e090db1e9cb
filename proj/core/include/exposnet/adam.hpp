#pragma once

#include <vector>

#include "exposnet/layers.hpp"

namespace exposnet {

struct AdamConfig {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    // Classic Adam with the L2 term folded into the gradient (not decoupled).
    float weight_decay = 0.0f;
};

class Adam {
public:
    Adam(std::vector<ParamRef> params, AdamConfig cfg);

    /// One update over all registered parameters. Throws on non-finite
    /// gradients. Does not zero the gradient buffers.
    void step();

    void set_lr(float lr) { cfg_.lr = lr; }
    float lr() const { return cfg_.lr; }
    long step_count() const { return t_; }

private:
    std::vector<ParamRef> params_;
    AdamConfig cfg_;
    std::vector<std::vector<float>> m_, v_;
    long t_ = 0;
};

}  // namespace exposnet
