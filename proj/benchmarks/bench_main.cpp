#include <benchmark/benchmark.h>

#include <vector>

#include "enachi/lambert_w.hpp"
#include "enachi/outer_scheduler.hpp"
#include "enachi/sim_engine.hpp"

using namespace enachi;

static void BM_LambertW0(benchmark::State& state) {
  double x = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lambert_w0(x));
    x = x < 1e6 ? x * 1.7 : 1e-6;
  }
}
BENCHMARK(BM_LambertW0);

static void BM_GreedySearch(benchmark::State& state) {
  SimConfig c;
  c.frame_deadline = 0.2;
  c.users = static_cast<int>(state.range(0));
  c.total_bandwidth = 2e6 * c.users;
  const UtilityParams params = c.utility_params();
  std::vector<UserState> users(static_cast<std::size_t>(c.users));
  for (int n = 0; n < c.users; ++n) {
    users[static_cast<std::size_t>(n)].queue = 2.0 + n;
    users[static_cast<std::size_t>(n)].frame_gain = c.gain_of(n) * (0.5 + 0.1 * n);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(greedy_partition_search(c.model(), users, params));
  }
}
BENCHMARK(BM_GreedySearch)->Arg(1)->Arg(5)->Arg(25);

static void BM_RunFrame(benchmark::State& state) {
  SimConfig c;
  c.frame_deadline = 0.2;
  c.users = static_cast<int>(state.range(0));
  c.total_bandwidth = 2e6 * c.users;
  c.frames = 1 << 30;
  SimState s = initial_state(c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_frame(s, c));
  }
}
BENCHMARK(BM_RunFrame)->Arg(1)->Arg(10);
BENCHMARK_MAIN();
