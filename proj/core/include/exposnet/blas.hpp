#pragma once

#include <cstddef>

namespace exposnet {

// Row-major single precision matrix multiply: C = A * B (+ C if accumulate).
// A is m x k, B is k x n, C is m x n.
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, const float* a,
           const float* b, float* c, bool accumulate = false);

}  // namespace exposnet
