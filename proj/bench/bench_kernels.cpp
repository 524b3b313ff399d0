#include <benchmark/benchmark.h>

#include <omp.h>

#include "toruslab/geometry/distance.hpp"
#include "toruslab/kernels/kernels.hpp"
#include "toruslab/minimal/minimal.hpp"

using namespace toruslab;

namespace {

const geometry::Grid& bumpy() {
    static const geometry::Grid grid(geometry::MetricField::bumpy_default(), {256, 60.0});
    return grid;
}

const std::vector<flow::GeodesicPath>& paths() {
    static const std::vector<flow::GeodesicPath> out = [] {
        std::vector<flow::GeodesicPath> p;
        const std::vector<double> angles{0.0, 0.3, 0.7853981633974483, 1.1};
        minimal::MinimalOptions options;
        options.check_stability = false;
        for (const auto& l : minimal::sample_lines(24, angles, 3)) {
            p.push_back(minimal::deck_normalized(minimal::minimal_for_times(bumpy(), l, 0.0, 11.0, options)).path);
        }
        return p;
    }();
    return out;
}

const std::vector<Vec2>& centres() {
    static const std::vector<Vec2> c = geometry::c_epsilon_centres();
    return c;
}

void BM_CloseMatrixSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::close_matrix(bumpy(), paths(), 10.0, 0.5));
}

void BM_CloseMatrixOmp(benchmark::State& state) {
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::close_matrix(bumpy(), paths(), 10.0, 0.5, jobs));
}

void BM_BallVolumesSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::ball_volumes_at(bumpy(), centres(), 0.25));
}

void BM_BallVolumesOmp(benchmark::State& state) {
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::ball_volumes_at(bumpy(), centres(), 0.25, jobs));
}

void thread_counts(benchmark::internal::Benchmark* b) {
    for (int j = 1; j <= omp_get_max_threads(); j *= 2) b->Arg(j);
}

}  // namespace

BENCHMARK(BM_CloseMatrixSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CloseMatrixOmp)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BallVolumesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BallVolumesOmp)->Apply(thread_counts)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
