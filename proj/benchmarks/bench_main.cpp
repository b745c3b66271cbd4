#include "rbce/dss.hpp"
#include "rbce/sampler.hpp"
#include "rbce/simbench.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace rbce;

StandardizedDataset bench_data(Eigen::Index n, Eigen::Index p) {
    return standardize(simulate_dataset(n, truth_magnitudes(StudyCase::Case1a, p, 3), 5));
}

// One full Gibbs sweep, all blocks.
void BM_GibbsSweep(benchmark::State& state) {
    const auto p = static_cast<Eigen::Index>(state.range(0));
    const ConditionalModel model(build_design(bench_data(75, p)), HierarchicalPrior::with_common_q(p, 0.3));
    Rng rng(1);
    LatentState s = initial_state(model, rng);
    for (auto _ : state) {
        sample_latent_treatment(s, model, rng);
        sample_indicator_blocks(s, model, rng);
        sample_coefficients(s, model, rng);
        sample_inclusion_probs(s, model, rng);
        sample_noise_precision(s, model, rng);
        benchmark::DoNotOptimize(s.nu.data());
    }
}
BENCHMARK(BM_GibbsSweep)->Arg(25)->Arg(50)->Arg(75);

void BM_Chain(benchmark::State& state) {
    const auto data = bench_data(75, 50);
    const auto prior = HierarchicalPrior::with_common_q(50, 0.3);
    SamplerConfig cfg;
    cfg.burn_in = 100;
    cfg.samples = 500;
    for (auto _ : state) {
        ++cfg.seed;
        benchmark::DoNotOptimize(run_chain(data, prior, cfg).nu.data());
    }
    state.SetItemsProcessed(state.iterations() * (cfg.burn_in + cfg.samples));
}
BENCHMARK(BM_Chain)->Unit(benchmark::kMillisecond);

void BM_LassoPath(benchmark::State& state) {
    const auto p = static_cast<Eigen::Index>(state.range(0));
    const auto data = bench_data(75, p);
    const Eigen::VectorXd target = data.inner.x * Eigen::VectorXd::LinSpaced(p, 1.0, -1.0);
    const Eigen::VectorXd weights = Eigen::VectorXd::Constant(p, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(lasso_path(data.inner.x, target, weights).coefs.size());
}
BENCHMARK(BM_LassoPath)->Arg(25)->Arg(75)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    const auto truth = truth_magnitudes(StudyCase::Case2b, 75, 3);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_dataset(75, truth, ++seed).x.data());
}
BENCHMARK(BM_Simulate);

}  // namespace
BENCHMARK_MAIN();
