#include <benchmark/benchmark.h>

#include "beamuq/elasticity.hpp"

using namespace beamuq;

namespace {

void BM_OneKnotSolve(benchmark::State& state) {
  const MaterialField material = one_knot_material(1e10, 0.4);
  const TractionProblem problem{BeamGeometry{1.0, 1.0}, 1e6, 0.0};
  const ParameterPoint p{1.0, 0.5, 0.15};
  const int basis = static_cast<int>(state.range(0));
  const IgaDiscretization iga{4, 4, basis, basis};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        qoi_corner(solve_traction_problem(problem, material, p, iga), problem.geometry));
  }
}
BENCHMARK(BM_OneKnotSolve)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TwoKnotSolve(benchmark::State& state) {
  const MaterialField material = two_knot_material(1e10, 0.4, 0.4, 1.0, 0.5);
  const TractionProblem problem{BeamGeometry{10.0, 1.0}, 1e6, 0.0};
  const ParameterPoint p{1.0, 0.6, 0.6, 0.06, 0.06, 4.0, 0.0};
  const IgaDiscretization iga{4, 4, static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(1))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        qoi_corner(solve_traction_problem(problem, material, p, iga), problem.geometry));
  }
}
BENCHMARK(BM_TwoKnotSolve)->Args({40, 16})->Args({48, 24})->Unit(benchmark::kMillisecond);

}  // namespace
