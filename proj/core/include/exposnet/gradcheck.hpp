#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace exposnet {

/// Maximum relative error between an analytic gradient and a central
/// finite-difference gradient of the scalar function `f` at `point`.
/// The step for coordinate i is eps * max(1, |x_i|); differences are
/// accumulated in double precision. Components where both gradients are
/// below `tiny` are treated as matching.
inline double grad_check(const std::function<double(const std::vector<float>&)>& f,
                         std::vector<float> point,
                         const std::vector<float>& analytic, double eps = 1e-3,
                         double tiny = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const float orig = point[i];
        const float h = static_cast<float>(eps * std::max(1.0, std::fabs(orig)));
        point[i] = orig + h;
        const double fp = f(point);
        point[i] = orig - h;
        const double fm = f(point);
        point[i] = orig;
        const double fd = (fp - fm) / (2.0 * static_cast<double>(h));
        const double an = analytic[i];
        const double denom = std::max(std::fabs(fd), std::fabs(an));
        if (denom < tiny) continue;
        worst = std::max(worst, std::fabs(fd - an) / denom);
    }
    return worst;
}

}  // namespace exposnet
