#include <benchmark/benchmark.h>

#include "dr/random.hpp"
#include "dr/reward/reward.hpp"

namespace {

using namespace dr;
using namespace dr::reward;

AdvantageTrace trace(std::size_t n) {
  Rng rng(5);
  AdvantageTrace t;
  for (std::size_t i = 0; i < n; ++i) t.rewards.push_back(uniform01(rng));
  for (std::size_t i = 0; i <= n; ++i) t.values.push_back(uniform01(rng));
  t.gamma = 0.99;
  t.lambda = 0.95;
  return t;
}

void BM_Gae(benchmark::State& state) {
  const auto t = trace(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gae_advantages(t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gae)->Arg(64)->Arg(1024)->Arg(16384);

void BM_PpoObjective(benchmark::State& state) {
  Rng rng(6);
  PpoBatch b;
  for (int i = 0; i < state.range(0); ++i) {
    b.logp_old.push_back(-uniform01(rng));
    b.logp_new.push_back(b.logp_old.back() + 0.1 * (uniform01(rng) - 0.5));
    b.advantages.push_back(uniform01(rng) - 0.5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ppo_clipped_objective(b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PpoObjective)->Arg(1024)->Arg(16384);

}  // namespace
