#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "exposnet/blas.hpp"

namespace {

std::vector<float> random_matrix(std::size_t n, uint32_t seed) {
    std::vector<float> m(n);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (float& v : m) v = u(rng);
    return m;
}

// Square gemm across the sizes the conv layers produce via im2col.
void BM_sgemm(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto a = random_matrix(static_cast<std::size_t>(n) * n, 1);
    const auto b = random_matrix(static_cast<std::size_t>(n) * n, 2);
    std::vector<float> c(static_cast<std::size_t>(n) * n);
    for (auto _ : state) {
        exposnet::sgemm(false, false, n, n, n, a.data(), b.data(), c.data());
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_sgemm)->Arg(64)->Arg(256)->Arg(512);

// The dominant conv shape in the network: 64 output channels over a 64 x 64
// grid with 3 x 3 kernels on 64 input channels.
void BM_sgemm_conv_shape(benchmark::State& state) {
    const int m = 64, k = 64 * 9, n = 64 * 64;
    const auto a = random_matrix(static_cast<std::size_t>(m) * k, 3);
    const auto b = random_matrix(static_cast<std::size_t>(k) * n, 4);
    std::vector<float> c(static_cast<std::size_t>(m) * n);
    for (auto _ : state) {
        exposnet::sgemm(false, false, m, n, k, a.data(), b.data(), c.data());
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * m * n * k);
}
BENCHMARK(BM_sgemm_conv_shape);

}  // namespace
