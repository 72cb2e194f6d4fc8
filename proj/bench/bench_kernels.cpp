#include <benchmark/benchmark.h>

#include <vector>

#include "catmon/calibration.hpp"
#include "catmon/global_monitor.hpp"
#include "catmon/local_monitor.hpp"

using namespace catmon;

namespace {

std::vector<StreamSpec> binary_streams(int p) {
    std::vector<StreamSpec> specs;
    specs.reserve(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) specs.emplace_back(i, NominalSpec({0.5, 0.5}));
    return specs;
}

struct StepFixture {
    explicit StepFixture(int p) : specs(binary_streams(p)) {
        Rng rng(RngSeed{7, 0});
        for (const auto& s : specs) {
            states.push_back(init_state(s, config.sample_size));
            counts.push_back(multinomial_sample(rng, config.sample_size, s.pi0()));
        }
    }
    ChartConfig config;
    std::vector<StreamSpec> specs;
    std::vector<EwmaState> states;
    std::vector<SampleCounts> counts;
};

void BM_chart_step(benchmark::State& state) {
    StepFixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(chart_step(f.states, f.specs, f.counts, f.config).value);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_chart_step_serial(benchmark::State& state) {
    StepFixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(chart_step_serial(f.states, f.specs, f.counts, f.config).value);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Out-of-control ARL with a short run length keeps each iteration small.
std::vector<ShiftSpec> shifted(int p) {
    std::vector<ShiftSpec> shifts(static_cast<std::size_t>(p), NoShift{});
    for (int i = 0; i < p / 4; ++i) shifts[static_cast<std::size_t>(i)] = NominalShift{{0.05, -0.05}};
    return shifts;
}

void BM_estimate_arl(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const auto specs = binary_streams(p);
    const auto shifts = shifted(p);
    ChartConfig config;
    config.limit = 20.0;
    for (auto _ : state) benchmark::DoNotOptimize(estimate_arl(specs, shifts, config, 64, 1).arl);
}

void BM_estimate_arl_serial(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const auto specs = binary_streams(p);
    const auto shifts = shifted(p);
    ChartConfig config;
    config.limit = 20.0;
    for (auto _ : state) benchmark::DoNotOptimize(estimate_arl_serial(specs, shifts, config, 64, 1).arl);
}

}  // namespace

BENCHMARK(BM_chart_step)->Arg(100)->Arg(1000)->Arg(10000);
BENCHMARK(BM_chart_step_serial)->Arg(100)->Arg(1000)->Arg(10000);
BENCHMARK(BM_estimate_arl)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_estimate_arl_serial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
