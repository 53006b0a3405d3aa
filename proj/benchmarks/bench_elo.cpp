#include <benchmark/benchmark.h>

#include <fmt/format.h>

#include "dr/eval/elo.hpp"
#include "dr/random.hpp"
#include "dr/time.hpp"

namespace {

using namespace dr;
using namespace dr::eval;

std::vector<PairwiseRecord> records(std::size_t n) {
  Rng rng(9);
  const std::vector<std::string> systems{"a", "b", "c", "d", "e", "f"};
  std::vector<PairwiseRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = uniform_index(rng, 6);
    const auto b = (a + 1 + uniform_index(rng, 5)) % 6;
    PairwiseRecord r;
    r.pair_id = fmt::format("p{}", i);
    r.left_system = systems[a];
    r.right_system = systems[b];
    r.verdict = static_cast<PairVerdict>(uniform_index(rng, 5));
    r.timestamp = Timestamp{} + std::chrono::seconds(i);
    out.push_back(std::move(r));
  }
  return out;
}

void BM_EloUpdate(benchmark::State& state) {
  const auto rs = records(1024);
  EloTable table;
  std::size_t i = 0;
  for (auto _ : state) table.apply(rs[i++ % rs.size()]);
  benchmark::DoNotOptimize(table.rating("a"));
}
BENCHMARK(BM_EloUpdate);

void BM_LeaderboardReplay(benchmark::State& state) {
  const auto rs = records(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(leaderboard({}, rs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LeaderboardReplay)->Arg(150)->Arg(10000);

void BM_SchedulePairings(benchmark::State& state) {
  std::vector<std::string> systems, queries;
  for (int i = 0; i < 6; ++i) systems.push_back(fmt::format("s{}", i));
  for (int q = 0; q < state.range(0); ++q) queries.push_back(fmt::format("q{}", q));
  for (auto _ : state) benchmark::DoNotOptimize(schedule_pairings(systems, queries, PairingMode::kRoundRobin, {}, 1));
}
BENCHMARK(BM_SchedulePairings)->Arg(10)->Arg(1000);

}  // namespace
