#include <benchmark/benchmark.h>

#include "sidx/deconv.hpp"
#include "sidx/model.hpp"
#include "sidx/pipeline.hpp"
#include "sidx/surrogate.hpp"

using namespace sidx;

namespace {

void BM_KernelConstruction(benchmark::State& state) {
    for (auto _ : state) {
        DeconvKernel k(0.5, 0.3, KernelSpec::triweight_fourier(), static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(k(1.0));
    }
}
BENCHMARK(BM_KernelConstruction)->Arg(64)->Arg(256);

void BM_KernelEval(benchmark::State& state) {
    const DeconvKernel k(0.5, 0.3, KernelSpec::triweight_fourier(), 256);
    double u = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(k(u));
        u += 1e-3;
    }
}
BENCHMARK(BM_KernelEval);

void BM_DeconvGrid(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const MatrixXd X = sample_design(n, DesignSpec::identity(1), 1);
    const VectorXd W = X.col(0);
    const VectorXd y = W.array().tanh();
    const IndexEstimate index{W, 0.1};
    const DeconvConfig cfg = DeconvConfig::defaults();
    for (auto _ : state) benchmark::DoNotOptimize(estimate_link(index, y, cfg));
    state.SetComplexityN(n);
}
BENCHMARK(BM_DeconvGrid)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_SurrogateFit(benchmark::State& state) {
    const Eigen::Index n = state.range(0), p = state.range(1);
    const auto spec = DesignSpec::identity(p);
    const MatrixXd X = sample_design(n, spec, 2);
    const auto beta = sample_coefficients(p, CoefficientScheme::uniform_sphere(), spec, 3);
    const SimModel model = SimModel::builtin("cloglog");
    const VectorXd y = generate_responses(X, beta, model, 4);
    const SurrogateProblem prob{model.link, Penalty::ridge(0.1)};
    for (auto _ : state) benchmark::DoNotOptimize(fit_coefficients(X, y, prob));
}
BENCHMARK(BM_SurrogateFit)->Args({250, 100})->Args({500, 200});

void BM_Pipeline(benchmark::State& state) {
    PipelineConfig cfg;
    const Dataset data = simulate(cfg, 1).data;
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(data, cfg));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
