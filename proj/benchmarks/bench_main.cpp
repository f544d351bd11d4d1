#include <benchmark/benchmark.h>

#include <vector>

#include "specshift/dataset_io.hpp"
#include "specshift/detector.hpp"
#include "specshift/metrics.hpp"
#include "specshift/random.hpp"
#include "specshift/repaste.hpp"

using namespace specshift;

namespace {

AnomalyMap random_map(Rng& rng, int w, int h) {
    AnomalyMap map(w, h, 0.0f, true);
    for (auto& v : map.data) v = static_cast<float>(rng.uniform());
    return map;
}

PixelMask square_mask(int w, int h, int side) {
    PixelMask m(w, h);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) m.at(w / 3 + x, h / 3 + y) = 1;
    }
    return m;
}

SyntheticSpec bench_spec(int size) {
    SyntheticSpec spec;
    spec.image_size = size;
    return spec;
}

void BM_Auroc(benchmark::State& state) {
    Rng rng(1);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = rng.uniform();
        labels[i] = static_cast<std::uint8_t>(i % 3 == 0);
    }
    for (auto _ : state) benchmark::DoNotOptimize(auroc(scores, labels));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000)->Arg(1000000);

void BM_Pro(benchmark::State& state) {
    Rng rng(2);
    const int size = static_cast<int>(state.range(0));
    std::vector<AnomalyMap> maps;
    std::vector<PixelMask> masks;
    for (int i = 0; i < 8; ++i) {
        maps.push_back(random_map(rng, size, size));
        masks.push_back(square_mask(size, size, size / 8));
    }
    std::vector<MapWithMask> items;
    for (std::size_t i = 0; i < maps.size(); ++i) items.push_back({&maps[i], &masks[i]});
    for (auto _ : state) benchmark::DoNotOptimize(pro(items));
}
BENCHMARK(BM_Pro)->Arg(64)->Arg(256);

void BM_Repaste(benchmark::State& state) {
    Rng rng(3);
    const int size = static_cast<int>(state.range(0));
    const auto spec = bench_spec(size);
    const Image prev = synthesize_normal(spec, 1);
    const Image next = synthesize_normal(spec, 2);
    const AnomalyMap map = random_map(rng, size / 8, size / 8);
    const RepasteConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(repaste(prev, map, next, cfg));
}
BENCHMARK(BM_Repaste)->Arg(64)->Arg(256);

void BM_DetectorScore(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const auto spec = bench_spec(size);
    std::vector<Image> train;
    for (std::uint64_t i = 0; i < 20; ++i) train.push_back(synthesize_normal(spec, i));
    ModelConfig mc;
    mc.features.patch_size = size / 8;
    mc.features.stride = size / 16;
    TrainConfig tc;
    tc.epochs = 1;
    const auto model = fit(train, tc, mc);
    const Image probe = synthesize_normal(spec, 99);
    for (auto _ : state) benchmark::DoNotOptimize(score(model, probe));
}
BENCHMARK(BM_DetectorScore)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
