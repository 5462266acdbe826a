#include <benchmark/benchmark.h>

#include "stiffrough/fbm.hpp"
#include "stiffrough/harness.hpp"
#include "stiffrough/implicit_solver.hpp"
#include "stiffrough/schemes.hpp"

namespace {

using namespace stiffrough;

static void BM_Cholesky(benchmark::State& state) {
  const Grid grid(1.0, static_cast<std::size_t>(state.range(0)));
  const DenseMatrix cov = covariance_matrix(0.75, grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cholesky(cov));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cholesky)->RangeMultiplier(2)->Range(128, 2048)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNCubed);

static void BM_SampleFbmCached(benchmark::State& state) {
  FbmConfig config;
  config.hurst = {0.5};
  config.grid = Grid(1.0, static_cast<std::size_t>(state.range(0)));
  CholeskyCache cache;
  std::uint64_t seed = 0;
  sample_fbm(config, seed, cache);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_fbm(config, ++seed, cache));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleFbmCached)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oNSquared);

static void BM_SolveStepCubic(benchmark::State& state) {
  const DriftField drift = catalogue::cubic_vector_drift(2);
  const Vector r{{10.0, -10.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_step(drift, 1.0 / 128.0, r));
  }
}
BENCHMARK(BM_SolveStepCubic);

static void BM_Example3Trajectory(benchmark::State& state) {
  const Problem problem = make_problem(ProblemId::example3);
  FbmConfig config;
  config.hurst = {5.0 / 12.0};
  config.dimension = 2;
  config.grid = Grid(1.0, static_cast<std::size_t>(state.range(0)));
  const SamplePath path = sample_fbm(config, 1);
  const Scheme scheme = static_cast<Scheme>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(scheme, problem, path));
  }
  state.SetLabel(to_string(scheme));
}
BENCHMARK(BM_Example3Trajectory)
    ->Args({1024, static_cast<long>(Scheme::semi_implicit_euler)})
    ->Args({1024, static_cast<long>(Scheme::simplified_milstein)})
    ->Args({1024, static_cast<long>(Scheme::semi_implicit_milstein3)})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
