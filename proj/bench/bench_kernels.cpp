// Serial reference vs OpenMP kernels. Pass --benchmark_filter to pick one.

#include "babelkit/dedup.hpp"
#include "babelkit/kernels.hpp"
#include "babelkit/parallel.hpp"
#include "babelkit/reference_model.hpp"
#include "test_support.hpp"

#include <benchmark/benchmark.h>

using namespace babelkit;

namespace {

const std::vector<std::vector<std::uint64_t>>& shingle_sets() {
    static const auto sets = [] {
        std::vector<std::vector<std::uint64_t>> out;
        for (std::uint64_t seed = 0; seed < 10; ++seed)
            for (const auto& d : testing::planted_corpus(seed).docs) out.push_back(shingle_hashes(d.text, 5));
        return out;
    }();
    return sets;
}

const std::vector<Document>& filter_docs() {
    static const auto docs = [] {
        std::vector<Document> out;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto c = testing::planted_corpus(seed).docs;
            for (auto& d : c) d.id += "_" + std::to_string(seed);
            out.insert(out.end(), c.begin(), c.end());
        }
        return out;
    }();
    return docs;
}

void BM_SignaturesSerial(benchmark::State& state) {
    const auto family = kernels::MinHashFamily::from_seed(1, 256);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::signatures_serial(shingle_sets(), family));
}

void BM_SignaturesParallel(benchmark::State& state) {
    const auto family = kernels::MinHashFamily::from_seed(1, 256);
    ThreadScope scope(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::signatures_parallel(shingle_sets(), family));
}

void noise_bench(benchmark::State& state, bool parallel) {
    const auto base = make_toy_checkpoint(testing::toy_config(8, 128), 1);
    std::optional<ThreadScope> scope;
    if (parallel) scope.emplace(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        state.PauseTiming();
        auto ckpt = base;
        std::vector<kernels::NoiseJob> jobs;
        int i = 0;
        for (auto& [name, t] : ckpt.tensors) jobs.push_back({&t, kernels::noise_stream_seed(3, i++, name)});
        state.ResumeTiming();
        if (parallel) kernels::apply_noise_parallel(jobs, 1e-4, 1e-4);
        else kernels::apply_noise_serial(jobs, 1e-4, 1e-4);
        benchmark::DoNotOptimize(ckpt);
    }
}

void BM_NoiseSerial(benchmark::State& state) { noise_bench(state, false); }
void BM_NoiseParallel(benchmark::State& state) { noise_bench(state, true); }

void BM_FilterSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(kernels::filter_serial(filter_docs(), FilterRules{}));
}

void BM_FilterParallel(benchmark::State& state) {
    ThreadScope scope(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::filter_parallel(filter_docs(), FilterRules{}));
}

}  // namespace

BENCHMARK(BM_SignaturesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignaturesParallel)->Arg(1)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseParallel)->Arg(1)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FilterSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FilterParallel)->Arg(1)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
