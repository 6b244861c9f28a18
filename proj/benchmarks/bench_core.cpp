#include <benchmark/benchmark.h>

#include "aidcots/ac_eval.hpp"
#include "aidcots/branch_and_bound.hpp"
#include "aidcots/pipeline.hpp"

namespace {

using namespace aidcots;

const Network& case14() {
    static const Network net = load_case(std::string(AIDCOTS_DATA_DIR) + "/case14_ieee.m");
    return net;
}

void BM_ParseCase14(benchmark::State& state) {
    const std::string path = std::string(AIDCOTS_DATA_DIR) + "/case14_ieee.m";
    for (auto _ : state) {
        benchmark::DoNotOptimize(load_case(path));
    }
}
BENCHMARK(BM_ParseCase14);

void BM_SolvePowerFlow(benchmark::State& state) {
    const Network& net = case14();
    const SwitchMask closed = net.all_closed();
    const std::vector<double> dispatch = redispatch_dc(net, closed);
    const InjectionSpec inj = injections_for_dispatch(net, dispatch);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_pf(net, closed, inj));
    }
}
BENCHMARK(BM_SolvePowerFlow);

void BM_SensitivityBundle(benchmark::State& state) {
    const Network& net = case14();
    const SwitchMask closed = net.all_closed();
    const std::vector<double> dispatch = redispatch_dc(net, closed);
    const InjectionSpec inj = injections_for_dispatch(net, dispatch);
    AdmittanceView view(net, closed);
    const PFState x = solve_pf(view, inj);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_sensitivities(view, x));
    }
}
BENCHMARK(BM_SensitivityBundle);

void BM_DcOtsSolve(benchmark::State& state) {
    const Network& net = case14();
    OTSConfig cfg;
    cfg.protect_bridges = false;
    const ModelDescription model = build_dc_ots(net, big_m(net, -0.6, 0.6), cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(branch_and_bound(model));
    }
}
BENCHMARK(BM_DcOtsSolve);

}  // namespace

BENCHMARK_MAIN();
