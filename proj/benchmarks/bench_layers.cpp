#include <benchmark/benchmark.h>

#include <random>

#include "exposnet/layers.hpp"

using namespace exposnet;

namespace {

Tensor random_tensor(std::vector<int> shape, uint32_t seed) {
    Tensor t(std::move(shape));
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (float& v : t.data) v = u(rng);
    return t;
}

void BM_conv_forward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    const int hw = static_cast<int>(state.range(1));
    Conv2d conv(c, c);
    std::mt19937 rng(1);
    he_uniform_init(conv.weight, c * 9, rng);
    Tensor x = random_tensor({1, c, hw, hw}, 2);
    for (auto _ : state) {
        Tensor y = conv.forward(x, Mode::kEval);
        benchmark::DoNotOptimize(y.data.data());
    }
}
BENCHMARK(BM_conv_forward)->Args({32, 128})->Args({64, 64})->Args({128, 32});

void BM_conv_backward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    const int hw = static_cast<int>(state.range(1));
    Conv2d conv(c, c);
    std::mt19937 rng(3);
    he_uniform_init(conv.weight, c * 9, rng);
    Tensor x = random_tensor({1, c, hw, hw}, 4);
    Tensor dout = random_tensor({1, c, hw, hw}, 5);
    for (auto _ : state) {
        conv.forward(x, Mode::kTrain);
        Tensor dx = conv.backward(dout);
        benchmark::DoNotOptimize(dx.data.data());
    }
}
BENCHMARK(BM_conv_backward)->Args({64, 64});

void BM_batchnorm_train(benchmark::State& state) {
    BatchNorm2d bn(64);
    Tensor x = random_tensor({8, 64, 32, 32}, 6);
    for (auto _ : state) {
        Tensor y = bn.forward(x, Mode::kTrain);
        benchmark::DoNotOptimize(y.data.data());
    }
}
BENCHMARK(BM_batchnorm_train);

void BM_bilinear_resize(benchmark::State& state) {
    BilinearResize rs(64, 64);
    Tensor x = random_tensor({1, 64, 16, 16}, 7);
    for (auto _ : state) {
        Tensor y = rs.forward(x, Mode::kEval);
        benchmark::DoNotOptimize(y.data.data());
    }
}
BENCHMARK(BM_bilinear_resize);

}  // namespace
