#include <benchmark/benchmark.h>

#include <numbers>

#include "rmm/bloch.hpp"
#include "rmm/homogenization.hpp"
#include "rmm/rmm_dispersion.hpp"
#include "rmm/rmm_solver.hpp"

namespace {

constexpr double kL = 1e-3;
const rmm::TetragonalElasticity kMacro{5.9e9, 0.627e9, 1.748e9};

rmm::RmmStaticParams statics() {
  return rmm::RmmStaticParams::from_micro({11.41e9, 7.5e9, 356.2e9}, kMacro, 0.1e9, 1089.6);
}

rmm::RmmDynamicParams dynamics() {
  rmm::RmmDynamicParams d;
  d.mu_c1 = 4.567e-6;
  d.mu_star_m1 = 1.3e-3;
  d.mu_m1 = 1.287e-4;
  d.lambda_m1 = 1.0443e-4 - 1.287e-4;
  d.lambda_m2 = d.mu_m2 = 2.71e-5;
  d.mu_c2 = d.mu_star_m2 = 2.036e-5;
  d.curv_inertia = 1.545e-10;
  return d;
}

void BM_RmmAssemble(benchmark::State& state) {
  const auto geo = rmm::UnitCellGeometry::all_solid(kL);
  for (auto _ : state) {
    rmm::RmmProblem p(rmm::build_mesh(geo, 1, static_cast<int>(state.range(0))));
    benchmark::DoNotOptimize(p.dofs().n_dofs);
  }
}
BENCHMARK(BM_RmmAssemble)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_RmmSolve(benchmark::State& state) {
  const auto geo = rmm::UnitCellGeometry::all_solid(kL);
  rmm::RmmProblem p(rmm::build_mesh(geo, static_cast<int>(state.range(1)),
                                    static_cast<int>(state.range(0))));
  const auto loads = rmm::AffineLoadCase::standard_set(0.01);
  const auto s = statics();
  for (auto _ : state) benchmark::DoNotOptimize(p.solve(s, loads));
}
BENCHMARK(BM_RmmSolve)->Args({20, 1})->Args({20, 2})->Unit(benchmark::kMillisecond);

void BM_Homogenize(benchmark::State& state) {
  const auto geo = rmm::UnitCellGeometry::cross_void(kL, 0.9 * kL, 0.3 * kL);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmm::homogenize_periodic(geo, rmm::aluminium(), 20));
  }
}
BENCHMARK(BM_Homogenize)->Unit(benchmark::kMillisecond);

void BM_BlochSolve(benchmark::State& state) {
  const auto geo = rmm::UnitCellGeometry::cross_void(kL, 0.9 * kL, 0.3 * kL);
  const rmm::BlochCell cell(geo, rmm::aluminium(), static_cast<int>(state.range(0)));
  const double k = 0.5 * std::numbers::pi / kL;
  for (auto _ : state) benchmark::DoNotOptimize(cell.solve(0.0, k, 8));
}
BENCHMARK(BM_BlochSolve)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_RmmDispersion(benchmark::State& state) {
  const auto s = statics();
  const auto d = dynamics();
  const double angle = state.range(0) * std::numbers::pi / 180.0;
  const auto ks = rmm::k_grid(angle, kL, 101);
  for (auto _ : state) benchmark::DoNotOptimize(rmm::branches(s, d, 1485.0, angle, ks));
}
BENCHMARK(BM_RmmDispersion)->Arg(0)->Arg(30)->Arg(45)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
