#include <benchmark/benchmark.h>

#include "exposnet/geo.hpp"
#include "exposnet/synth.hpp"

using namespace exposnet;

namespace {

Scenario scene() {
    ScenarioConfig cfg;
    cfg.seed = 5;
    cfg.extent_m = 1000.0;
    cfg.n_buildings = 40;
    cfg.n_bsas = 14;
    return generate_scenario(cfg);
}

void BM_rasterize_buildings(benchmark::State& state) {
    const Scenario sc = scene();
    Tile tile;
    tile.center = sc.origin;
    for (auto _ : state) {
        Tensor t = rasterize_buildings(sc.buildings, tile);
        benchmark::DoNotOptimize(t.data.data());
    }
}
BENCHMARK(BM_rasterize_buildings);

void BM_rasterize_radiation(benchmark::State& state) {
    const Scenario sc = scene();
    Tile tile;
    tile.center = sc.origin;
    for (auto _ : state) {
        Tensor t = rasterize_radiation(sc.bsas, kBandsMhz[0], tile);
        benchmark::DoNotOptimize(t.data.data());
    }
}
BENCHMARK(BM_rasterize_radiation);

void BM_resample_raster(benchmark::State& state) {
    const Scenario sc = scene();
    Tile tile;
    tile.center = sc.origin;
    for (auto _ : state) {
        Tensor t = resample_raster(sc.infrared, tile, 0.0f);
        benchmark::DoNotOptimize(t.data.data());
    }
}
BENCHMARK(BM_resample_raster);

}  // namespace
