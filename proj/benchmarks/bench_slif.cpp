#include <benchmark/benchmark.h>

#include <slif/integrator.hpp>
#include <slif/response.hpp>
#include <slif/sweep.hpp>

using namespace slif;

static void simulate_pair_trace(benchmark::State& state) {
    NeuronParams p;
    auto cfg = IntegratorConfig::defaults_for(p);
    auto inputs = pair(1.0, 3.0);
    for (auto _: state) {
        auto trace = simulate(p, inputs, 40.0, cfg, false);
        benchmark::DoNotOptimize(trace.v.data());
    }
    state.SetItemsProcessed(state.iterations()*4000);
}
BENCHMARK(simulate_pair_trace);

static void pair_peak(benchmark::State& state) {
    NeuronParams p;
    auto cfg = IntegratorConfig::defaults_for(p);
    for (auto _: state) {
        benchmark::DoNotOptimize(measure_peak(p, pair(1.0, 3.0), cfg).amplitude);
    }
}
BENCHMARK(pair_peak);

static void response_curve_200(benchmark::State& state) {
    NeuronParams p;
    IstScan scan;
    scan.n_points = 200;
    auto cfg = IntegratorConfig::defaults_for(p);
    for (auto _: state) {
        auto curve = response_curve(p, scan, cfg);
        benchmark::DoNotOptimize(curve.amplitudes.data());
    }
}
BENCHMARK(response_curve_200)->Unit(benchmark::kMillisecond);

static void response_metrics(benchmark::State& state) {
    NeuronParams p;
    for (auto _: state) {
        benchmark::DoNotOptimize(measure_response(p, IstScan{}).timewidth);
    }
}
BENCHMARK(response_metrics)->Unit(benchmark::kMillisecond);

static void grid_sweep_5x5(benchmark::State& state) {
    SweepSpec spec = default_sweep_spec(SweepParam::c_m, SweepParam::g_l);
    spec.axis1.n = 5;
    spec.axis2.n = 5;
    spec.constraint = ProductConstraint{Product::c_m_tau_s, 1.0e-3};
    for (auto _: state) {
        auto result = run_sweep(spec, static_cast<unsigned>(state.range(0)));
        benchmark::DoNotOptimize(result.cells.data());
    }
}
BENCHMARK(grid_sweep_5x5)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
