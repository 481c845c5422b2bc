#include <benchmark/benchmark.h>

#include "aquaclear/classifier.hpp"
#include "aquaclear/enhance.hpp"
#include "aquaclear/filter.hpp"
#include "aquaclear/metrics.hpp"
#include "aquaclear/neural/attention.hpp"
#include "aquaclear/neural/extractor.hpp"
#include "aquaclear/synthetic.hpp"

namespace {

using namespace aquaclear;

ImageF32 scene(int side) {
    return synthetic::make_archetype(Category8::ColorBiasLowLightBlur, 3, side, side);
}

void BM_Convolve5x5(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const Plane plane = scene(side).plane(0);
    const Kernel2D k = Kernel2D::box(5);
    for (auto _ : state) benchmark::DoNotOptimize(convolve2d(plane, k));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Convolve5x5)->Arg(64)->Arg(256);

void BM_Classify(benchmark::State& state) {
    const ImageF32 img = scene(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(classify(img));
}
BENCHMARK(BM_Classify)->Arg(64)->Arg(256);

void BM_Clahe(benchmark::State& state) {
    const ImageF32 img = scene(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(clahe_v(img));
}
BENCHMARK(BM_Clahe)->Arg(64)->Arg(256);

void BM_Nlm(benchmark::State& state) {
    const ImageF32 img = synthetic::noisy_constant(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)),
                                                   0.5f, 0.05, 1);
    for (auto _ : state) benchmark::DoNotOptimize(nlm_denoise(img));
}
BENCHMARK(BM_Nlm)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ClassicPlan(benchmark::State& state) {
    const ImageF32 img = scene(64);
    const EnhancementPlan plan = build_plan(classify(img).flags);
    for (auto _ : state) benchmark::DoNotOptimize(apply_plan(img, plan));
}
BENCHMARK(BM_ClassicPlan)->Unit(benchmark::kMillisecond);

void BM_VggFeatures(benchmark::State& state) {
    const ImageF32 img = scene(64);
    const auto vgg = nn::init_weights(nn::build_vgg_head(static_cast<int>(state.range(0))), 7);
    for (auto _ : state) benchmark::DoNotOptimize(nn::extract_features(img, vgg));
}
BENCHMARK(BM_VggFeatures)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_ResnetFeatures(benchmark::State& state) {
    const ImageF32 img = scene(64);
    const auto resnet = nn::init_weights(nn::build_resnet_head(), 7);
    for (auto _ : state) benchmark::DoNotOptimize(nn::extract_features(img, resnet));
}
BENCHMARK(BM_ResnetFeatures)->Unit(benchmark::kMillisecond);

void BM_Uciqe(benchmark::State& state) {
    const ImageF32 img = scene(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(uciqe(img));
}
BENCHMARK(BM_Uciqe)->Arg(64)->Arg(256);

void BM_Uiqm(benchmark::State& state) {
    const ImageF32 img = scene(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(uiqm(img));
}
BENCHMARK(BM_Uiqm)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
