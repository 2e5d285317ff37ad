#include <benchmark/benchmark.h>

#include "hemoda/flow_solver.hpp"

namespace {

using namespace hemoda;

FlowState developed(const FlowSolver& solver, const InletSpec& inlet) {
  FlowState s = FlowState::zeros(solver.mesh());
  return solver.advance(s, 0.05, inlet, OutletSpec{});
}

void BM_CoarseEulerStep(benchmark::State& state) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  const FlowSolver solver(mesh, FluidModel::newtonian());
  const auto inlet = InletSpec::constant(0.1);
  FlowState s = developed(solver, inlet);
  const double dt = solver.stable_dt(s, inlet, s.t, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(s, dt, inlet, OutletSpec{}));
}
BENCHMARK(BM_CoarseEulerStep);

void BM_FineCassonHeunStep(benchmark::State& state) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 160, 64);
  SolverOptions options;
  options.scheme = TimeScheme::kHeun;
  const FlowSolver solver(mesh, FluidModel::casson(), options);
  const auto inlet = InletSpec::constant(0.1);
  FlowState s = developed(solver, inlet);
  const double dt = solver.stable_dt(s, inlet, s.t, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(s, dt, inlet, OutletSpec{}));
}
BENCHMARK(BM_FineCassonHeunStep)->Unit(benchmark::kMillisecond);

void BM_PressureSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40 * n, 16 * n);
  const auto method = state.range(1) == 0 ? PoissonMethod::kCholesky : PoissonMethod::kRelaxation;
  const PressureSolver solver(mesh, PoissonOptions{method});
  std::vector<double> div(mesh.cell_count(), 0.0);
  for (int c : mesh.fluid_cells()) div[c] = ((c * 7919) % 101 - 50) * 1e-3;
  std::vector<double> q(mesh.cell_count());
  for (auto _ : state) {
    std::fill(q.begin(), q.end(), 0.0);
    benchmark::DoNotOptimize(solver.solve(div, 0.0, q));
  }
}
BENCHMARK(BM_PressureSolve)->Args({1, 0})->Args({1, 1})->Args({4, 0})->Unit(benchmark::kMicrosecond);

}  // namespace
