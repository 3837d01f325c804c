#include <benchmark/benchmark.h>

#include <random>

#include "vtp/cluster/kmeans.hpp"
#include "vtp/flow/model.hpp"
#include "vtp/flow/nll.hpp"
#include "vtp/predict/predict.hpp"
#include "vtp/sim/simulate.hpp"

using namespace vtp;

namespace {

Exec exec_of(const benchmark::State& state) {
    return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) == 0 ? "serial" : "openmp x" + std::to_string(max_threads()));
}

flow::CnfModel bench_model() {
    NormalizationParams norm = NormalizationParams::identity(2, 0);
    norm.center(2) = 50.0;
    norm.half_range(2) = 50.0;
    norm.half_range(0) = norm.half_range(1) = 20000.0;
    flow::CnfModel model = flow::create_model({}, norm, 1);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 0.05);
    for (Matrix* p : model.parameters()) *p += Matrix::NullaryExpr(p->rows(), p->cols(), [&] { return g(rng); });
    return model;
}

void BM_SimulateSimple(benchmark::State& state) {
    sim::SimpleTargetConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(sim::simulate_simple(c, 1000, exec_of(state)));
    label(state);
}

void BM_DrawSamples(benchmark::State& state) {
    const flow::CnfModel model = bench_model();
    predict::PredictionRequest req;
    req.targets = {{{Vector::Zero(2), 0.0}, Vector()}};
    req.times = {100.0};
    req.samples_per_target = 10000;
    for (auto _ : state) benchmark::DoNotOptimize(predict::draw_samples(model, req, exec_of(state)));
    label(state);
}

void BM_PdfGrid(benchmark::State& state) {
    const flow::CnfModel model = bench_model();
    const Pose pose{Vector::Zero(2), 0.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(predict::evaluate_pdf_grid(model, 60.0, Vector(), pose, {}, exec_of(state)));
    label(state);
}

void BM_KMeansAssign(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    const Matrix points = Matrix::NullaryExpr(20000, 20, [&] { return g(rng); });
    const Matrix means = points.topRows(3);
    std::vector<int> labels;
    Vector sq;
    for (auto _ : state) benchmark::DoNotOptimize(cluster::assign_points(points, means, labels, sq, exec_of(state)));
    label(state);
}

void BM_NllGradient(benchmark::State& state) {
    const flow::CnfModel model = bench_model();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Matrix x = Matrix::NullaryExpr(1000, 2, [&] { return u(rng); });
    const Matrix cond = Matrix::NullaryExpr(1000, 1, [&] { return u(rng); });
    for (auto _ : state) benchmark::DoNotOptimize(flow::nll_gradient(model, x, cond, 1e-3, exec_of(state)));
    label(state);
}

}  // namespace

BENCHMARK(BM_SimulateSimple)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DrawSamples)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PdfGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeansAssign)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NllGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
