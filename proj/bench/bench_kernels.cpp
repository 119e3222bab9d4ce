// Serial references against the OpenMP kernels on identical inputs.
#include "roughvol/gaussian_engine.hpp"
#include "roughvol/local_vol.hpp"
#include "roughvol/models.hpp"
#include "roughvol/moments.hpp"
#include "roughvol/pricing.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

using namespace roughvol;

namespace {

constexpr std::uint64_t kSeed = 1234;

RoughBergomiParams params()
{
  RoughBergomiParams p;
  p.hurst = 0.2;
  return p;
}

void set_counters(benchmark::State& state, long paths)
{
  state.counters["paths/s"] = benchmark::Counter(static_cast<double>(paths), benchmark::Counter::kIsIterationInvariantRate);
  state.counters["threads"] = omp_get_max_threads();
}

template <bool Parallel>
void simulate_states_bench(benchmark::State& state)
{
  const int steps = static_cast<int>(state.range(0));
  const int paths = static_cast<int>(state.range(1));
  const SimGrid grid = SimGrid::uniform(0.1, steps);
  JointFactor::cached(steps, params().hurst);  // factor build excluded
  const std::vector<int> observe{steps - 1};
  for (auto _ : state) {
    StateTable t = Parallel ? simulate_states(params(), grid, paths, kSeed, observe)
                            : simulate_states_serial(params(), grid, paths, kSeed, observe);
    benchmark::DoNotOptimize(t.states.data());
  }
  set_counters(state, paths);
}

template <bool Parallel>
void joint_paths_bench(benchmark::State& state)
{
  const int steps = static_cast<int>(state.range(0));
  const int paths = static_cast<int>(state.range(1));
  const SimGrid grid = SimGrid::uniform(0.1, steps);
  JointFactor::cached(steps, params().hurst);
  for (auto _ : state) {
    PathBatch b = Parallel ? simulate_joint_paths(grid, params().hurst, paths, kSeed)
                           : simulate_joint_paths_serial(grid, params().hurst, paths, kSeed);
    benchmark::DoNotOptimize(b.wh.data());
  }
  set_counters(state, paths);
}

template <bool Parallel>
void summarize_bench(benchmark::State& state)
{
  const int paths = static_cast<int>(state.range(0));
  const RoughBergomiParams p = params();
  const auto states = simulate_terminal_states(p, SimGrid::uniform(0.05, 64), paths, kSeed);
  FeatureTable table(states.size());
  for (double k : {95.0, 100.0, 105.0})
    add_call_feature(table, states, p, 0.05, k);
  add_local_vol_features(table, states, p, 100.0);
  for (auto _ : state) {
    MomentSummary s = Parallel ? summarize(table) : summarize_serial(table);
    benchmark::DoNotOptimize(s.mean.data());
  }
  set_counters(state, paths);
}

}  // namespace

BENCHMARK(simulate_states_bench<false>)->Name("simulate_states/serial")->Args({64, 20000})->Args({256, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK(simulate_states_bench<true>)->Name("simulate_states/openmp")->Args({64, 20000})->Args({256, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK(joint_paths_bench<false>)->Name("joint_paths/serial")->Args({128, 10000})->Unit(benchmark::kMillisecond);
BENCHMARK(joint_paths_bench<true>)->Name("joint_paths/openmp")->Args({128, 10000})->Unit(benchmark::kMillisecond);
BENCHMARK(summarize_bench<false>)->Name("summarize/serial")->Arg(200000)->Unit(benchmark::kMillisecond);
BENCHMARK(summarize_bench<true>)->Name("summarize/openmp")->Arg(200000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
