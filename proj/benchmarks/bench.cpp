#include "switchsynth/io.hpp"
#include "switchsynth/lmi.hpp"
#include "switchsynth/sim.hpp"
#include "switchsynth/solver.hpp"
#include "switchsynth/switching.hpp"
#include "switchsynth/verify.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace switchsynth;

namespace {

struct Demo {
    ProblemConfig cfg = parse_config(read_text_file(SWITCHSYNTH_BENCH_DATA "/demo.json"));
    SynthesisOutcome syn = synthesize(cfg.plant, cfg.filter, cfg.n_c, cfg.synthesis);
};

const Demo& demo() {
    static const Demo d;
    return d;
}

void assemble_case1(benchmark::State& state) {
    const ProblemConfig cfg = example_config("case1");
    for (auto _ : state)
        benchmark::DoNotOptimize(build_problem(cfg.plant, cfg.filter, cfg.n_c, cfg.synthesis));
}
BENCHMARK(assemble_case1);

void objective_case1(benchmark::State& state) {
    const ProblemConfig cfg = example_config("case1");
    const LmiProblem p = build_problem(cfg.plant, cfg.filter, cfg.n_c, cfg.synthesis);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    Vector v(p.layout.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = n(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(max_violation(p, v));
}
BENCHMARK(objective_case1);

void synthesize_demo(benchmark::State& state) {
    const ProblemConfig& cfg = demo().cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize(cfg.plant, cfg.filter, cfg.n_c, cfg.synthesis));
}
BENCHMARK(synthesize_demo)->Unit(benchmark::kMillisecond);

void simulate_demo(benchmark::State& state) {
    const Demo& d = demo();
    const Certificate& c = d.syn.certificate;
    GeneratorOptions gen;
    gen.min_gap = c.tau_d + 0.005;
    const SwitchingSignal sig = generate_adt_signal(1.05 * c.tau_a_star, c.N0, c.T, 2, 3, gen);
    const DelayedSignal ds = delay_signal(sig, c.tau_d, DelayMode::Constant);
    SimulationInput in;
    in.x0 = d.cfg.simulation.x0;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate(d.cfg.plant, *d.syn.gains, d.cfg.filter, ds, Disturbance::zero(1), in,
                                          &c.P_tilde));
    state.SetLabel(std::to_string(sig.switch_count()) + " switches");
}
BENCHMARK(simulate_demo)->Unit(benchmark::kMillisecond);

void verify_demo(benchmark::State& state) {
    const Demo& d = demo();
    SimulationPlan plan = d.cfg.simulation;
    plan.seeds = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(verify_certificate(d.cfg.plant, *d.syn.gains, d.cfg.filter, d.syn.certificate, plan));
}
BENCHMARK(verify_demo)->Arg(1)->Arg(16)->UseRealTime()->Unit(benchmark::kMillisecond);

void adt_validation(benchmark::State& state) {
    const double T = static_cast<double>(state.range(0));
    const SwitchingSignal s = generate_adt_signal(0.5, 2.0, T, 3, 11);
    for (auto _ : state)
        benchmark::DoNotOptimize(validate_adt(s, 0.5, 2.0));
    state.SetComplexityN(static_cast<benchmark::IterationCount>(s.switch_count()));
}
BENCHMARK(adt_validation)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

} // namespace

BENCHMARK_MAIN();
