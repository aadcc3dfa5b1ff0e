#include <blochtomo/polarimetry.hpp>
#include <blochtomo/pt_symmetry.hpp>
#include <blochtomo/tomography.hpp>
#include <blochtomo/topology.hpp>

#include <benchmark/benchmark.h>

using namespace blochtomo;

static void BM_NormalizedSet(benchmark::State& state) {
    const Mat2 u = step_operator(ModelParams(1.3, 1.4), Quasimomentum(0.7));
    for (auto _ : state) benchmark::DoNotOptimize(normalized_set(u));
}
BENCHMARK(BM_NormalizedSet);

static void BM_PixelMultistart(benchmark::State& state) {
    const PolarimetrySet data = synthesize_dataset(ModelParams(1.3, 1.4), 90, {});
    const RatioSet r = data.records[17].ratios;
    for (auto _ : state) benchmark::DoNotOptimize(reconstruct_pixel_multistart(r, SolverConfig::noiseless()));
}
BENCHMARK(BM_PixelMultistart);

static void BM_ReconstructBz(benchmark::State& state) {
    NoiseConfig noise;
    noise.gaussian_sigma = state.range(1) ? 0.01 : 0.0;
    noise.seed = 3;
    const PolarimetrySet data = synthesize_dataset(ModelParams(1.3, 1.4), static_cast<int>(state.range(0)), noise);
    const SolverConfig cfg = state.range(1) ? SolverConfig::noisy() : SolverConfig::noiseless();
    for (auto _ : state) benchmark::DoNotOptimize(reconstruct_bz(data, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReconstructBz)->Args({90, 0})->Args({90, 1})->Args({360, 0})->Unit(benchmark::kMillisecond);

static void BM_Winding(benchmark::State& state) {
    const ClosedFormBand band = closed_form_band(ModelParams(1.3, 1.4), static_cast<int>(state.range(0)));
    const auto n = band.bloch_vectors();
    for (auto _ : state) benchmark::DoNotOptimize(winding_number(band.q, n));
}
BENCHMARK(BM_Winding)->Arg(90)->Arg(720);

static void BM_PhaseDiagram(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(phase_diagram({0.0, kTwoPi}, {0.0, 2.0}, res, 90));
}
BENCHMARK(BM_PhaseDiagram)->Arg(16)->Arg(64)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_FindExceptionalPoints(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(find_exceptional_points(1.3));
}
BENCHMARK(BM_FindExceptionalPoints)->Unit(benchmark::kMillisecond);

static void BM_ClassifyPhase(benchmark::State& state) {
    const auto cs = canonical_from_operator(step_operator(ModelParams(1.3, 1.4), Quasimomentum(2.43)));
    const RotatedForm rf = rotate_hamiltonian(effective_hamiltonian(cs));
    for (auto _ : state) benchmark::DoNotOptimize(classify_phase(rf));
}
BENCHMARK(BM_ClassifyPhase);

static void BM_RenderAndIngest(benchmark::State& state) {
    ImageGeometry g;
    g.width = g.height = g.bz_width_px = static_cast<int>(state.range(0));
    g.waist_px = g.bz_width_px;
    for (auto _ : state) {
        const auto images = render_images(ModelParams(1.3, 1.4), g, {});
        benchmark::DoNotOptimize(ingest_images(images, 90));
    }
}
BENCHMARK(BM_RenderAndIngest)->Arg(180)->Arg(540)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
