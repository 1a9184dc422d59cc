// Serial reference vs OpenMP replicate loop on a small Monte Carlo grid, plus
// the structure-search kernel both of them spend their time in.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "bnps/ground_truth.hpp"
#include "bnps/monte_carlo.hpp"
#include "bnps/structure_learning.hpp"

using namespace bnps;

namespace {

McConfig grid(std::size_t n) {
    McConfig cfg;
    cfg.scenarios = {scenario_by_id("S4"), scenario_by_id("S13")};
    cfg.sizes = {n};
    cfg.replicates = 32;
    cfg.methods = {McMethod::BnHajek, McMethod::LogWlrNoCov, McMethod::LogWlrCov};
    cfg.master_seed = 1;
    return cfg;
}

void BM_GridSerial(benchmark::State& state) {
    const auto cfg = grid(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_grid_serial(cfg));
    state.SetItemsProcessed(state.iterations() * 2 * cfg.replicates);
}

void BM_GridParallel(benchmark::State& state) {
    auto cfg = grid(static_cast<std::size_t>(state.range(0)));
    cfg.workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(run_grid(cfg));
    state.SetItemsProcessed(state.iterations() * 2 * cfg.replicates);
}

void BM_TabuSearch(benchmark::State& state) {
    const auto data = ancestral_sample(ground_truth_network(), static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(tabu_search(data, {}));
}

void parallel_args(benchmark::internal::Benchmark* b) {
    const int threads = omp_get_max_threads();
    for (const int n : {250, 2500}) {
        b->Args({n, 1});
        if (threads > 1) b->Args({n, threads});
    }
}

}  // namespace

BENCHMARK(BM_GridSerial)->Arg(250)->Arg(2500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridParallel)->Apply(parallel_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TabuSearch)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
