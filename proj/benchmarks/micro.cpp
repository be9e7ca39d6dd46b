#include <benchmark/benchmark.h>

#include <random>

#include "gridmapf/cbs.hpp"
#include "gridmapf/losses.hpp"
#include "gridmapf/observation.hpp"
#include "gridmapf/odrmstar.hpp"
#include "gridmapf/sampler.hpp"
#include "gridmapf/world.hpp"

using namespace gridmapf;

namespace {

GridWorld bench_world(int size, double density, int team, std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.fixed_size = size;
  cfg.fixed_density = density;
  cfg.team_size = team;
  cfg.seed = seed;
  return sample_environment(cfg).world;
}

void BM_SampleEnvironment(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bench_world(static_cast<int>(state.range(0)), 0.2, 16, seed++));
  }
}
BENCHMARK(BM_SampleEnvironment)->Arg(10)->Arg(40)->Arg(70);

void BM_ObserveAll(benchmark::State& state) {
  const GridWorld w = bench_world(40, 0.2, static_cast<int>(state.range(0)), 3);
  const FovConfig cfg{};
  for (auto _ : state) {
    for (int i = 0; i < w.num_agents(); ++i) benchmark::DoNotOptimize(observe(w, i, cfg, true));
  }
  state.SetItemsProcessed(state.iterations() * w.num_agents());
}
BENCHMARK(BM_ObserveAll)->Arg(8)->Arg(64);

void BM_RandomStep(benchmark::State& state) {
  GridWorld w = bench_world(40, 0.2, static_cast<int>(state.range(0)), 5);
  std::mt19937_64 rng(1);
  std::vector<Action> acts(w.num_agents());
  StepOptions opts;
  opts.evaluate_blocking = state.range(1) != 0;
  for (auto _ : state) {
    for (Action& a : acts) a = action_from_index(static_cast<int>(rng() % 5));
    benchmark::DoNotOptimize(step(w, acts, rng, opts));
  }
}
BENCHMARK(BM_RandomStep)->Args({16, 0})->Args({16, 1})->Args({64, 1});

void BM_Cbs(benchmark::State& state) {
  const GridWorld w = bench_world(20, 0.1, static_cast<int>(state.range(0)), 11);
  const auto starts = w.positions();
  const auto goals = w.goals();
  for (auto _ : state) benchmark::DoNotOptimize(cbs_solve(w.map(), starts, goals));
}
BENCHMARK(BM_Cbs)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Odrmstar(benchmark::State& state) {
  const GridWorld w = bench_world(20, 0.1, static_cast<int>(state.range(0)), 11);
  const auto starts = w.positions();
  const auto goals = w.goals();
  OdrmstarOptions o;
  o.epsilon = 1.5;
  for (auto _ : state) benchmark::DoNotOptimize(odrmstar_solve(w.map(), starts, goals, o));
}
BENCHMARK(BM_Odrmstar)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_BcLoss(benchmark::State& state) {
  std::vector<ActionDistribution> probs(256, ActionDistribution{0.1, 0.2, 0.3, 0.2, 0.2});
  std::vector<Action> experts(256, Action::East);
  for (auto _ : state) benchmark::DoNotOptimize(bc_loss(probs, experts));
}
BENCHMARK(BM_BcLoss);

}  // namespace

BENCHMARK_MAIN();
