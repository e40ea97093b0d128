#include <map>

#include <benchmark/benchmark.h>

#include "rar/estimators.hpp"
#include "rar/gaussian_sim.hpp"
#include "rar/marginal_screen.hpp"
#include "rar/wlasso.hpp"

using namespace rar;

namespace {

const Dataset& scenario_data(Index n) {
  static std::map<Index, Dataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, standardize(sample_dataset(builtin_scenario("1A", n), 7))).first;
  return it->second;
}

}  // namespace

static void BM_SampleDataset(benchmark::State& state) {
  const ScenarioSpec s = builtin_scenario("1A", state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_dataset(s, ++seed));
  state.counters["p"] = static_cast<double>(s.dimension());
}
BENCHMARK(BM_SampleDataset)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_LassoPath(benchmark::State& state) {
  const Dataset& d = scenario_data(state.range(0));
  SolverConfig cfg;
  cfg.engine = static_cast<SolverEngine>(state.range(1));
  const PenaltyProfile prof = PenaltyProfile::uniform(d.p());
  for (auto _ : state) benchmark::DoNotOptimize(fit_path(d, prof, cfg));
}
BENCHMARK(BM_LassoPath)
    ->Args({100, static_cast<int>(SolverEngine::Auto)})
    ->Args({500, static_cast<int>(SolverEngine::Auto)})
    ->Args({500, static_cast<int>(SolverEngine::Residual)})
    ->Unit(benchmark::kMillisecond);

static void BM_PermutationThreshold(benchmark::State& state) {
  const Dataset& d = scenario_data(500);
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(permutation_threshold(d, m, 3));
}
BENCHMARK(BM_PermutationThreshold)->Arg(1)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

static void BM_Mrar(benchmark::State& state) {
  const Dataset& d = scenario_data(state.range(0));
  EstimatorConfig cfg;
  cfg.standardize = false;
  cfg.permutations = 10;
  for (auto _ : state) benchmark::DoNotOptimize(run_mrar(d, cfg));
}
BENCHMARK(BM_Mrar)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
