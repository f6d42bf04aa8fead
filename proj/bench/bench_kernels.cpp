#include <benchmark/benchmark.h>

#include "increloc/bench.hpp"
#include "increloc/environment.hpp"
#include "increloc/global_map.hpp"

using namespace increloc;

namespace {

std::vector<Point2> mapped_landmarks() {
    const TrialConfig cfg = default_config();
    return GlobalMap::from_world(generate_world(1, cfg.world)).landmarks();
}

std::vector<TrialConfig> quick_grid() {
    TrialConfig base = quick_config();
    base.record_series = false;
    SweepGrid grid;
    grid.ratios = {0.0, 0.3};
    grid.schemes = {Scheme::hybrid};
    grid.seeds = {1, 2};
    return expand_grid(base, grid);
}

void BM_build_pairs_serial(benchmark::State& state) {
    const auto pts = mapped_landmarks();
    for (auto _ : state) benchmark::DoNotOptimize(build_pairs_serial(pts, PairIndexParams{}));
    state.counters["landmarks"] = static_cast<double>(pts.size());
}

void BM_build_pairs_parallel(benchmark::State& state) {
    const auto pts = mapped_landmarks();
    for (auto _ : state) benchmark::DoNotOptimize(build_pairs_parallel(pts, PairIndexParams{}));
    state.counters["landmarks"] = static_cast<double>(pts.size());
}

void BM_sweep_serial(benchmark::State& state) {
    const auto cfgs = quick_grid();
    for (auto _ : state) benchmark::DoNotOptimize(sweep_serial(cfgs));
    state.counters["trials"] = static_cast<double>(cfgs.size());
}

void BM_sweep_parallel(benchmark::State& state) {
    const auto cfgs = quick_grid();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sweep_parallel(cfgs, static_cast<int>(state.range(0))));
    }
    state.counters["trials"] = static_cast<double>(cfgs.size());
}

}  // namespace

BENCHMARK(BM_build_pairs_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_pairs_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_sweep_parallel)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
