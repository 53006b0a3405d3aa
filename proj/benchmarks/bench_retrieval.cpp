#include <benchmark/benchmark.h>

#include <fmt/format.h>

#include "dr/random.hpp"
#include "dr/retrieval/index.hpp"
#include "dr/retrieval/search.hpp"

namespace {

using namespace dr;
using namespace dr::retrieval;

const char* kWords[] = {"solar", "wind", "grid", "battery", "storage", "policy", "market", "price", "demand",
                        "supply", "carbon", "emission", "turbine", "panel", "capacity", "forecast", "region",
                        "import", "export", "hydro", "nuclear", "coal", "gas", "subsidy", "tariff"};

std::vector<Document> synthetic_corpus(std::size_t docs, Rng& rng) {
  std::vector<Document> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    for (int p = 0; p < 4; ++p) {
      for (int w = 0; w < 60; ++w) {
        text += kWords[uniform_index(rng, std::size(kWords))];
        text += ' ';
      }
      text += "\n\n";
    }
    out.push_back({fmt::format("d{}", d), fmt::format("site{}.example", d % 7), text, std::nullopt});
  }
  return out;
}

void BM_BuildIndex(benchmark::State& state) {
  Rng rng(1);
  const auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(build_index(corpus));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(100)->Arg(1000);

void BM_Bm25Search(benchmark::State& state) {
  Rng rng(2);
  auto index = std::make_shared<ParagraphIndex>(build_index(synthetic_corpus(static_cast<std::size_t>(state.range(0)), rng)));
  LocalSearchBackend backend(index, AuthorityList{{"site0.example"}, 1.5});
  SearchParams params;
  params.k = 10;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto q = fmt::format("{} {} {}", kWords[i % 25], kWords[(i * 7) % 25], kWords[(i * 13) % 25]);
    benchmark::DoNotOptimize(backend.search(q, params));
    ++i;
  }
}
BENCHMARK(BM_Bm25Search)->Arg(100)->Arg(1000)->Arg(5000);

void BM_CachedSearch(benchmark::State& state) {
  Rng rng(3);
  auto index = std::make_shared<ParagraphIndex>(build_index(synthetic_corpus(500, rng)));
  auto backend = std::make_shared<LocalSearchBackend>(index, AuthorityList{});
  SearchService service(backend, 1u << 30);
  for (auto _ : state) benchmark::DoNotOptimize(service.search("Solar  Battery storage"));
}
BENCHMARK(BM_CachedSearch);

}  // namespace
