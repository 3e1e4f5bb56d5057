// Microbenchmarks for the per-step hot paths. The interesting numbers are
// ns/step for the moment update (scales with dim) and draws/s for the
// counter generator; the rest guard against accidental slowdowns in the
// history transform, the integrator, and exact pattern enumeration.

#include <benchmark/benchmark.h>

#include <memory>

#include "adamflow/adam.hpp"
#include "adamflow/field.hpp"
#include "adamflow/flow.hpp"
#include "adamflow/innovation.hpp"
#include "adamflow/patterns.hpp"
#include "adamflow/rng.hpp"
#include "adamflow/schedule.hpp"

namespace {

using namespace adamflow;

void BM_CounterRngUniform(benchmark::State& state) {
    CounterRng rng(0x9e3779b97f4a7c15ull, 0);
    double acc = 0.0;
    for (auto _ : state) acc += rng.next_uniform();
    benchmark::DoNotOptimize(acc);
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CounterRngUniform);

void BM_AdamStep(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const DampingParams p(0.9, 0.999, 1e-8);
    AdamState st = make_adam_start(Vec(d, 0.1));
    Vec x(d, 0.25);
    for (auto _ : state) {
        adam_step_inplace(st, x, 1e-3, p, AdamVariant::kPlain);
        benchmark::DoNotOptimize(st.theta.data());
    }
    state.SetItemsProcessed(state.iterations() * d);
}
BENCHMARK(BM_AdamStep)->Arg(1)->Arg(10)->Arg(100);

void BM_ScheduleCursor(benchmark::State& state) {
    const StepSchedule s = StepSchedule::power(0.1, 0.7, 1u << 30);
    auto cur = s.cursor_at(0);
    for (auto _ : state) {
        if (!cur.advance()) cur = s.cursor_at(0);
        benchmark::DoNotOptimize(cur.gamma());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ScheduleCursor);

void BM_HistoryTransform(benchmark::State& state) {
    // One field-estimate replicate: K innovation draws through the
    // discounted-average transform.
    const int K = static_cast<int>(state.range(0));
    const DampingParams p(0.9, 0.99, 1e-8);
    auto quad = std::make_shared<QuadraticObjective>(Vec{1.0});
    auto model = make_gaussian_gradient(quad, 0.5);
    const Vec theta{0.3};
    std::uint64_t seed = 7;
    for (auto _ : state) {
        const FieldEstimate fe = estimate_field(*model, theta, p, 1, K, seed++, 1);
        benchmark::DoNotOptimize(fe.value[0]);
    }
    state.SetItemsProcessed(state.iterations() * K);
}
BENCHMARK(BM_HistoryTransform)->Arg(400)->Arg(4000);

void BM_FlowStep(benchmark::State& state) {
    auto quad = std::make_shared<QuadraticObjective>(Vec{1.0, 2.0}, Vec{0.1, -0.2});
    const FieldFn field = FieldFn::from_objective(quad, DampingParams(0.9, 0.999, 1.0));
    for (auto _ : state) {
        const FlowPath path = integrate_flow(field, Vec{1.0, 0.5}, 1.0, 1e-3);
        benchmark::DoNotOptimize(path.t_end());
    }
    state.SetItemsProcessed(state.iterations() * 1000);  // steps per integrate
}
BENCHMARK(BM_FlowStep);

void BM_PatternEnumeration(benchmark::State& state) {
    const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        const CombinatoricReport rep = combinatoric_bound_check(n, 4);
        benchmark::DoNotOptimize(rep.pass);
    }
}
BENCHMARK(BM_PatternEnumeration)->Arg(3)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
