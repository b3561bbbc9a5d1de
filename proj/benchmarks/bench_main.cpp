#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "bifluid/coupling.hpp"
#include "bifluid/momentum.hpp"
#include "bifluid/scenario.hpp"
#include "bifluid/transport.hpp"

using namespace bifluid;

namespace {

std::shared_ptr<const Problem> bundled(const std::string& name, int cells) {
  Scenario s = load_scenario(std::string(BIFLUID_SCENARIO_DIR) + "/" + name + ".yaml");
  apply_overrides(s, cells, std::nullopt);
  return std::make_shared<const Problem>(to_problem_spec(s));
}

FaceVelocity stretching(const Mesh& mesh) {
  FaceVelocity u;
  const std::size_t n = mesh.cell_count();
  for (std::size_t i = 1; i < n; ++i) u.interior.push_back(1.0 + 0.5 * i / static_cast<double>(n));
  for (const auto& f : mesh.boundary_faces()) u.boundary.push_back(f.center[0] < 0.5 ? -1.0 : 1.5);
  return u;
}

void BM_ParabolicStep(benchmark::State& state) {
  const Mesh mesh = Mesh::interval(static_cast<int>(state.range(0)), 1.0);
  const FaceVelocity u = stretching(mesh);
  DensityField r;
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) r.values.push_back(2.0 + std::sin(6.0 * mesh.center(k)[0]));
  const std::vector<double> rb(mesh.boundary_faces().size(), 2.0);
  const double dt = 0.5 / mesh.cell_count();
  for (auto _ : state) {
    r = parabolic_step(mesh, r, u, 0.01, dt, rb);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ParabolicStep)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_TransportStep(benchmark::State& state) {
  const Mesh mesh = Mesh::interval(static_cast<int>(state.range(0)), 1.0);
  const FaceVelocity u = stretching(mesh);
  RatioField s;
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) s.values.push_back(0.5 + 0.2 * std::sin(6.0 * mesh.center(k)[0]));
  const std::vector<double> sb(mesh.boundary_faces().size(), 0.5);
  const double dt = 0.5 / mesh.cell_count();
  for (auto _ : state) {
    s = transport_step(mesh, s, u, dt, sb);
    benchmark::DoNotOptimize(s.values.data());
  }
}
BENCHMARK(BM_TransportStep)->RangeMultiplier(4)->Range(64, 16384);

void BM_GalerkinAssembly(benchmark::State& state) {
  const Mesh mesh = Mesh::interval(static_cast<int>(state.range(0)), 1.0);
  for (auto _ : state) {
    GalerkinBasis basis(mesh, static_cast<int>(state.range(1)));
    benchmark::DoNotOptimize(basis.cell_values().data());
  }
}
BENCHMARK(BM_GalerkinAssembly)->Args({200, 8})->Args({800, 16})->Args({3200, 32});

void BM_GalerkinAssembly2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = Mesh::rectangle(n, n, 1.0, 1.0);
  for (auto _ : state) {
    GalerkinBasis basis(mesh, 4, 4);
    benchmark::DoNotOptimize(basis.cell_values().data());
  }
}
BENCHMARK(BM_GalerkinAssembly2D)->Arg(16)->Arg(32)->Arg(64);

void BM_FixedPointStep(benchmark::State& state) {
  const auto pb = bundled(state.range(1) ? "rectangle-2d" : "inflow-fill", static_cast<int>(state.range(0)));
  const FluidState s0 = pb->initial_state();
  const double dt = pb->time_step();
  for (auto _ : state) {
    auto res = fixed_point_solve(*pb, s0, dt);
    benchmark::DoNotOptimize(res.record.coeffs.data());
  }
}
BENCHMARK(BM_FixedPointStep)->Args({100, 0})->Args({400, 0})->Args({20, 1})->Unit(benchmark::kMillisecond);

void BM_Level1Run(benchmark::State& state) {
  const auto pb = bundled("inflow-fill", static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto t = run_level1(pb);
    benchmark::DoNotOptimize(t.steps.data());
  }
}
BENCHMARK(BM_Level1Run)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
