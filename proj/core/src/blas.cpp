#include "exposnet/blas.hpp"

// Eigen rather than a BLAS library: the gemm kernels are compiled for the
// host ISA directly (see the -march=native option in core/CMakeLists.txt),
// which sidesteps runtime CPU dispatch entirely and keeps everything on one
// deterministic thread.
#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>

namespace exposnet {

namespace {
using RowMat =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;
}  // namespace

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, const float* a,
           const float* b, float* c, bool accumulate) {
    ConstMap A(a, trans_a ? k : m, trans_a ? m : k);
    ConstMap B(b, trans_b ? n : k, trans_b ? k : n);
    Map C(c, m, n);
    if (!trans_a && !trans_b) {
        if (accumulate) C.noalias() += A * B;
        else C.noalias() = A * B;
    } else if (trans_a && !trans_b) {
        if (accumulate) C.noalias() += A.transpose() * B;
        else C.noalias() = A.transpose() * B;
    } else if (!trans_a && trans_b) {
        if (accumulate) C.noalias() += A * B.transpose();
        else C.noalias() = A * B.transpose();
    } else {
        if (accumulate) C.noalias() += A.transpose() * B.transpose();
        else C.noalias() = A.transpose() * B.transpose();
    }
}

}  // namespace exposnet
