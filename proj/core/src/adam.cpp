#include "exposnet/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace exposnet {

Adam::Adam(std::vector<ParamRef> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const ParamRef& p : params_) {
        m_.emplace_back(p.value->numel(), 0.0f);
        v_.emplace_back(p.value->numel(), 0.0f);
    }
}

void Adam::step() {
    ++t_;
    const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        float* w = params_[pi].value->data.data();
        const float* g = params_[pi].grad->data.data();
        float* m = m_[pi].data();
        float* v = v_[pi].data();
        const std::size_t n = params_[pi].value->numel();
        if (!all_finite(*params_[pi].grad))
            throw std::runtime_error("Adam: non-finite gradient in " +
                                     params_[pi].name);
        for (std::size_t i = 0; i < n; ++i) {
            const float gi = g[i] + cfg_.weight_decay * w[i];
            m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * gi;
            v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * gi * gi;
            const float mhat = m[i] / bc1;
            const float vhat = v[i] / bc2;
            w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace exposnet
