#include <benchmark/benchmark.h>

#include "cbfrl/barrier.hpp"
#include "cbfrl/cartpole.hpp"
#include "cbfrl/gridworld.hpp"
#include "cbfrl/oracle.hpp"
#include "cbfrl/trainer.hpp"
#include "cbfrl/verification.hpp"

using namespace cbfrl;

namespace {

ValueNet bench_net(Head head) {
    RngStream rng(1, "net-init");
    return make_value_net({4, 64, 64, 2}, head, 0.99, rng);
}

void BM_CartpoleStep(benchmark::State& state) {
    const CartPoleParams params;
    StateVec x = {0.1, 0.0, 0.02, 0.0};
    int a = 0;
    for (auto _ : state) {
        x = cartpole_step(x, a, params);
        a ^= 1;
        if (std::abs(x[0]) > 2.0) x = {0.1, 0.0, 0.02, 0.0};
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_CartpoleStep);

void BM_ForwardSingle(benchmark::State& state) {
    const ValueNet net = bench_net(Head::kBounded);
    const StateVec x = {0.1, -0.5, 0.02, 0.3};
    for (auto _ : state) {
        benchmark::DoNotOptimize(value_of(net, x));
    }
}
BENCHMARK(BM_ForwardSingle);

void BM_ForwardBatch128(benchmark::State& state) {
    const ValueNet net = bench_net(Head::kBounded);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(128, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_batch(net, batch));
    }
}
BENCHMARK(BM_ForwardBatch128);

void BM_BackwardBatch128(benchmark::State& state) {
    const ValueNet net = bench_net(Head::kBounded);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(128, 4);
    const ForwardTrace trace = forward_batch(net, batch);
    const Eigen::MatrixXd upstream = Eigen::MatrixXd::Random(128, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(backward_batch(net, trace, upstream));
    }
}
BENCHMARK(BM_BackwardBatch128);

void BM_ValueIteration(benchmark::State& state) {
    const GridWorld gw = default_gridworld();
    for (auto _ : state) {
        benchmark::DoNotOptimize(value_iteration(gw.mdp, 0.99, 1e-9));
    }
}
BENCHMARK(BM_ValueIteration);

void BM_ComputePartition(benchmark::State& state) {
    const GridWorld gw = default_gridworld();
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_partition(gw.mdp));
    }
}
BENCHMARK(BM_ComputePartition);

void BM_MValid1k(benchmark::State& state) {
    const ValueNet net = bench_net(Head::kBounded);
    const BarrierFn h = make_barrier(net, BarrierMode::kRawLogit, 50.0);
    const SafetySpec spec = cartpole_safety_spec();
    const DynamicsFn dynamics = cartpole_dynamics();
    VerificationConfig cfg;
    cfg.n_samples = 1000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m_valid(h, cfg, spec, dynamics, 2));
    }
}
BENCHMARK(BM_MValid1k);

void BM_UnsafeRejectionSample(benchmark::State& state) {
    const SafetySpec spec = cartpole_safety_spec();
    RngStream rng(3, "unsafe-sampler");
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_state(spec, rng, SampleMode::kUnsafeOnly));
    }
}
BENCHMARK(BM_UnsafeRejectionSample);

} // namespace

BENCHMARK_MAIN();
