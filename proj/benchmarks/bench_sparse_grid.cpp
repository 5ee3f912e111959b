#include <benchmark/benchmark.h>

#include <cmath>

#include "beamuq/sparse_grid.hpp"

using namespace beamuq;

namespace {

ParameterSpace space3() { return ParameterSpace({{0.5, 1.5}, {0.25, 0.75}, {0.1, 0.2}}); }

Surrogate build_surrogate(int level) {
  const ParameterSpace space = space3();
  SparseGrid grid = build_sparse_grid(space, clenshaw_curtis_families(space),
                                      level_to_knots_doubling,
                                      MultiIndexSet::smolyak(3, level));
  ReducedSparseGrid reduced = reduce(grid);
  const auto f = scalar_fom([](const ParameterPoint& p) {
    return std::exp(p[0]) / (1.0 + p[1] * p[2]);
  });
  return evaluate_on_grid(f, std::move(grid), std::move(reduced));
}

void BM_BuildAndReduce(benchmark::State& state) {
  const ParameterSpace space = space3();
  const auto families = clenshaw_curtis_families(space);
  const auto set = MultiIndexSet::smolyak(3, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling, set);
    benchmark::DoNotOptimize(reduce(grid).size());
  }
}
BENCHMARK(BM_BuildAndReduce)->Arg(3)->Arg(5)->Arg(6);

void BM_Interpolate(benchmark::State& state) {
  const Surrogate surrogate = build_surrogate(static_cast<int>(state.range(0)));
  const auto queries = sample_uniform(surrogate.grid.space(), 256, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(interpolate(surrogate, queries).data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}
BENCHMARK(BM_Interpolate)->Arg(3)->Arg(5);

void BM_ClenshawCurtisRule(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(clenshaw_curtis_rule(count, 0.25, 0.75).weights.data());
  }
}
BENCHMARK(BM_ClenshawCurtisRule)->Arg(17)->Arg(65)->Arg(129);

}  // namespace
