#include <benchmark/benchmark.h>

#include "collenc/codecs.hpp"
#include "collenc/collision.hpp"
#include "collenc/harness/dataset.hpp"
#include "collenc/nn/vae.hpp"
#include "collenc/render.hpp"
#include "collenc/rng.hpp"
#include "collenc/scene.hpp"

using namespace collenc;

namespace {

const harness::DatasetConfig& desk() {
    static const harness::DatasetConfig c{};
    return c;
}

const DepthImage& desk_depth() {
    static const DepthImage d = harness::render_pair(desk(), 7).depth;
    return d;
}

void BM_Raycast(benchmark::State& state) {
    SceneConfig sc = desk().scene;
    sc.seed = 7;
    const Scene scene = generate_scene(sc);
    const CameraIntrinsics K = desk().intrinsics();
    for (auto _ : state) benchmark::DoNotOptimize(raycast_depth(scene, K, sc.max_range));
}
BENCHMARK(BM_Raycast)->Unit(benchmark::kMillisecond);

void BM_CollisionImage(benchmark::State& state) {
    const CollisionParams p = CollisionParams::for_robot(0.25);
    for (auto _ : state) benchmark::DoNotOptimize(collision_image(desk_depth(), desk().intrinsics(), p));
}
BENCHMARK(BM_CollisionImage)->Unit(benchmark::kMillisecond);

Plane desk_plane() {
    const DepthImage& d = desk_depth();
    Plane p(d.width(), d.height());
    for (std::size_t i = 0; i < d.size(); ++i) p.values[i] = d[i] / d.max_range();
    return p;
}

void BM_FftRoundTrip(benchmark::State& state) {
    const Plane p = desk_plane();
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fft_decompress(fft_compress(p, n)));
}
BENCHMARK(BM_FftRoundTrip)->Arg(32)->Arg(256);

void BM_WaveletRoundTrip(benchmark::State& state) {
    const Plane p = desk_plane();
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(wavelet_decompress(wavelet_compress(p, n)));
}
BENCHMARK(BM_WaveletRoundTrip)->Arg(32)->Arg(256);

void BM_VaeForward(benchmark::State& state) {
    const nn::VaeModel m = nn::VaeModel::create(nn::VaeConfig{}, 1);
    const nn::Tensor x = nn::normalize_image(desk_depth(), desk_depth().max_range());
    for (auto _ : state) benchmark::DoNotOptimize(nn::reconstruct(m, x));
}
BENCHMARK(BM_VaeForward)->Unit(benchmark::kMillisecond);

void BM_VaeForwardBackward(benchmark::State& state) {
    const nn::VaeModel m = nn::VaeModel::create(nn::VaeConfig{}, 1);
    const nn::Tensor x = nn::normalize_image(desk_depth(), desk_depth().max_range());
    const auto mask = validity_mask(desk_depth());
    const std::vector<double> noise(static_cast<std::size_t>(m.config().latent), 0.5);
    nn::Gradients g = nn::zero_gradients(m);
    for (auto _ : state) benchmark::DoNotOptimize(nn::accumulate_gradients(m, x, x, mask, noise, g));
}
BENCHMARK(BM_VaeForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
