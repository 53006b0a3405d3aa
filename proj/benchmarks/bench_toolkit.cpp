#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <unistd.h>

#include "dr/random.hpp"
#include "dr/toolkit/patch.hpp"
#include "dr/toolkit/phash.hpp"

namespace {

using namespace dr;
using namespace dr::toolkit;

GrayImage image(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img{w, h, std::vector<std::uint8_t>(w * h)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      img.pixels[y * w + x] = static_cast<std::uint8_t>((x + y) % 256 / 2 + uniform_index(rng, 64));
    }
  }
  return img;
}

void BM_Phash(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto img = image(side, side, 1);
  for (auto _ : state) benchmark::DoNotOptimize(phash64(img));
}
BENCHMARK(BM_Phash)->Arg(256)->Arg(1024);

std::filesystem::path bench_file() {
  return std::filesystem::temp_directory_path() / fmt::format("dr-bench-patch-{}.txt", ::getpid());
}

std::string source(std::size_t lines) {
  std::string out;
  for (std::size_t i = 0; i < lines; ++i) out += fmt::format("    let value_{} = compute(input_{}, {});\n", i, i, i * 3);
  return out;
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

void BM_PatchExact(benchmark::State& state) {
  const auto f = bench_file();
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto body = source(n);
  const auto anchor = fmt::format("let value_{} = compute(input_{}, {});", n / 2, n / 2, n / 2 * 3);
  for (auto _ : state) {
    state.PauseTiming();
    write(f, body);
    state.ResumeTiming();
    benchmark::DoNotOptimize(apply_patch({f, anchor, "let value = 0;", 0.85}));
  }
  std::filesystem::remove(f);
}
BENCHMARK(BM_PatchExact)->Arg(500)->Arg(5000);

void BM_PatchFuzzy(benchmark::State& state) {
  const auto f = bench_file();
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto body = source(n);
  // Whitespace drift forces the fuzzy path.
  const auto anchor = fmt::format("let  value_{} = compute( input_{}, {} );", n / 2, n / 2, n / 2 * 3);
  for (auto _ : state) {
    state.PauseTiming();
    write(f, body);
    state.ResumeTiming();
    benchmark::DoNotOptimize(apply_patch({f, anchor, "let value = 0;", 0.85}));
  }
  std::filesystem::remove(f);
}
BENCHMARK(BM_PatchFuzzy)->Arg(500)->Arg(2000);

void BM_Similarity(benchmark::State& state) {
  const std::string a(static_cast<std::size_t>(state.range(0)), 'a');
  std::string b = a;
  b[b.size() / 2] = 'b';
  for (auto _ : state) benchmark::DoNotOptimize(normalized_similarity(a, b));
}
BENCHMARK(BM_Similarity)->Arg(64)->Arg(512);

}  // namespace
