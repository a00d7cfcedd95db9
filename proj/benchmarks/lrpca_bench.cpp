#include <benchmark/benchmark.h>

#include "lrpca/matrix.hpp"
#include "lrpca/solver.hpp"
#include "lrpca/synthetic.hpp"
#include "lrpca/thresholding.hpp"

namespace {

using namespace lrpca;

void BM_SoftThreshold(benchmark::State& state) {
  const Index n = state.range(0);
  const ProblemInstance inst = GenerateInstance(n, n, 5, 0.1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SoftThreshold(inst.y, 0.01));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_SoftThreshold)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SparsifyTopFraction(benchmark::State& state) {
  const Index n = state.range(0);
  const ProblemInstance inst = GenerateInstance(n, n, 5, 0.1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SparsifyTopFraction(inst.y, 0.2));
  }
}
BENCHMARK(BM_SparsifyTopFraction)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_TruncatedSvd(benchmark::State& state) {
  const Index n = state.range(0);
  const Index r = state.range(1);
  const ProblemInstance inst = GenerateInstance(n, n, r, 0.0, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ComputeTruncatedSvd(inst.y, r, 7));
  }
}
BENCHMARK(BM_TruncatedSvd)->Args({500, 5})->Args({1000, 5})->Args({1000, 10})
    ->Unit(benchmark::kMillisecond);

// One soft-threshold iteration, reusing the previous state's storage.
void BM_LrpcaStep(benchmark::State& state) {
  const Index n = state.range(0);
  const Index r = state.range(1);
  const ProblemInstance inst = GenerateInstance(n, n, r, 0.1, 1);
  const double zeta0 = MatrixNorm(inst.x_star, NormKind::kMaxAbs);
  SolverState s = SpectralInit(inst.y, r, zeta0, 1);
  for (auto _ : state) {
    s = LrpcaStep(std::move(s), inst.y, 0.1 * zeta0, 0.5);
  }
}
BENCHMARK(BM_LrpcaStep)->Args({1000, 5})->Args({1000, 10})->Args({2000, 5})
    ->Unit(benchmark::kMillisecond);

void BM_ScaledGdStep(benchmark::State& state) {
  const Index n = state.range(0);
  const ProblemInstance inst = GenerateInstance(n, n, 5, 0.1, 1);
  const SolverState init =
      SpectralInit(inst.y, 5, MatrixNorm(inst.x_star, NormKind::kMaxAbs), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScaledGdStep(init, inst.y, 0.2, 0.5));
  }
}
BENCHMARK(BM_ScaledGdStep)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
