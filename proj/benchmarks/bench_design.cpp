#include "growthdesign/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace growthdesign;

namespace {

DesignProblem logistic_problem(CovarianceKind kind) {
    DesignProblem p;
    p.time_points = 7;
    p.total_items = 100;
    p.model = {CurveFamily::Logistic, Eigen::Vector4d(0, 3, 1, 0)};
    p.spec = {kind, 0.5, 0.6, 1.0};
    return p;
}

void BM_LogDet(benchmark::State& state) {
    const auto eval = logistic_problem(CovarianceKind::AR1).evaluator();
    VectorXd w = VectorXd::Constant(7, 1.0 / 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval.log_det(w));
    }
}
BENCHMARK(BM_LogDet);

void BM_EvaluateHessian(benchmark::State& state) {
    const auto eval = logistic_problem(CovarianceKind::AR1).evaluator();
    VectorXd w = VectorXd::Constant(7, 1.0 / 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval.evaluate(w, CriterionEvaluator::Detail::Hessian));
    }
}
BENCHMARK(BM_EvaluateHessian);

void BM_Certificate(benchmark::State& state) {
    const auto p = logistic_problem(CovarianceKind::CompoundSymmetry);
    const auto d = DesignWeights::uniform(7, p.total_items);
    for (auto _ : state) {
        benchmark::DoNotOptimize(check_optimality(d, p.model, p.spec));
    }
}
BENCHMARK(BM_Certificate);

void BM_SolveNumeric(benchmark::State& state) {
    const auto p = logistic_problem(state.range(0) ? CovarianceKind::AR1 : CovarianceKind::CompoundSymmetry);
    SolverOptions opts;
    opts.restarts = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_numeric(p, opts));
    }
}
BENCHMARK(BM_SolveNumeric)->ArgsProduct({{0, 1}, {0, 8}})->Unit(benchmark::kMicrosecond);

void BM_SweepCell(benchmark::State& state) {
    const auto inputs = CellInputs::from(logistic_problem(CovarianceKind::AR1));
    SolverOptions opts;
    opts.restarts = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_cell(inputs, opts, 0));
    }
}
BENCHMARK(BM_SweepCell)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
