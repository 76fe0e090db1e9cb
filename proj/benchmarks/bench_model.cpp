#include <benchmark/benchmark.h>

#include <random>

#include "exposnet/model.hpp"
#include "exposnet/training.hpp"

using namespace exposnet;

namespace {

Tensor random_input(int n, uint32_t seed) {
    Tensor x({n, kInputChannels, kTileGrid, kTileGrid});
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (float& v : x.data) v = u(rng);
    return x;
}

void BM_model_forward_eval(benchmark::State& state) {
    ModelConfig cfg;
    cfg.option = ModelConfig::Option::kTotal;
    ExposNet model(cfg);
    Tensor x = random_input(1, 1);
    const std::vector<std::vector<float>> heights = {{0.4f, 0.6f}};
    for (auto _ : state) {
        Tensor y = model.forward(x, heights, Mode::kEval);
        benchmark::DoNotOptimize(y.data.data());
    }
}
BENCHMARK(BM_model_forward_eval);

void BM_model_train_step(benchmark::State& state) {
    ModelConfig cfg;
    cfg.option = ModelConfig::Option::kTotal;
    ExposNet model(cfg);
    Tensor x = random_input(1, 2);
    const std::vector<std::vector<float>> heights = {{0.4f, 0.6f}};
    Tensor truth({1, 2}, 0.3f);
    for (auto _ : state) {
        model.zero_grad();
        Tensor y = model.forward(x, heights, Mode::kTrain);
        LossGrad lg = loss_total(y, truth);
        model.backward(lg.dpred);
        benchmark::DoNotOptimize(lg.value);
    }
}
BENCHMARK(BM_model_train_step);

}  // namespace

BENCHMARK_MAIN();
