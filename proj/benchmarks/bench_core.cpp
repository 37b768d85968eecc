// Micro benchmarks for the hot paths: factorization, the factored inverse,
// hard thresholding and the shared CV workspace.

#include "crda/classifier.hpp"
#include "crda/model_selection.hpp"
#include "crda/rscm.hpp"
#include "crda/simgen.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

namespace {

using namespace crda;

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      out(i, j) = normal(rng);
    }
  }
  return out;
}

void BM_ThinSvdViaGram(benchmark::State& state) {
  const Matrix Xc = gaussian(state.range(0), state.range(1), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(thin_svd_via_gram(Xc));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ThinSvdViaGram)
    ->Args({2500, 100})
    ->Args({5000, 100})
    ->Args({10000, 100})
    ->Args({20000, 100})
    ->Unit(benchmark::kMillisecond)
    ->Complexity(benchmark::oN);

void BM_InverseApply(benchmark::State& state) {
  const Index p = state.range(0);
  const auto factors = std::make_shared<const SvdFactors>(thin_svd_via_gram(gaussian(p, 100, 2)));
  const auto rc = build_rscm(factors, 0.5);
  const Matrix M = gaussian(p, 3, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rc.inverse_apply(M));
  }
  state.SetComplexityN(p);
}
BENCHMARK(BM_InverseApply)
    ->RangeMultiplier(2)
    ->Range(2500, 40000)
    ->Unit(benchmark::kMicrosecond)
    ->Complexity(benchmark::oN);

// Reference point: solving with the dense p x p matrix.
void BM_DenseInverseApply(benchmark::State& state) {
  const Index p = state.range(0);
  const auto factors = std::make_shared<const SvdFactors>(thin_svd_via_gram(gaussian(p, 100, 2)));
  const Matrix dense = build_rscm(factors, 0.5).dense();
  const Matrix M = gaussian(p, 3, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense.llt().solve(M));
  }
  state.SetComplexityN(p);
}
BENCHMARK(BM_DenseInverseApply)
    ->Arg(250)
    ->Arg(500)
    ->Arg(1000)
    ->Unit(benchmark::kMillisecond)
    ->Complexity(benchmark::oNCubed);

void BM_HardThreshold(benchmark::State& state) {
  const Matrix T = gaussian(state.range(0), 3, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hard_threshold(T, 100, RowNorm::Linf));
  }
}
BENCHMARK(BM_HardThreshold)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_CvWorkspaceSetupI(benchmark::State& state) {
  const auto data = generate(setup_spec(SetupId::I), 5);
  const auto folds = make_folds(data.train.labels(), data.train.groups(), 5, 6);
  const Grid grid = default_grids(data.train.p());
  for (auto _ : state) {
    const CvWorkspace ws(data.train, folds);
    benchmark::DoNotOptimize(ws.search_hard(grid, RowNorm::Linf));
  }
}
BENCHMARK(BM_CvWorkspaceSetupI)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
