#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sfcevent/detect.hpp"
#include "sfcevent/zorder.hpp"

using namespace sfcevent;

namespace {

std::vector<std::vector<std::uint32_t>> random_points(std::size_t count, int dims, int bits) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint32_t> level(0, (1u << bits) - 1);
  std::vector<std::vector<std::uint32_t>> out(count, std::vector<std::uint32_t>(dims));
  for (auto& p : out)
    for (auto& v : p) v = level(rng);
  return out;
}

void BM_MortonEncode(benchmark::State& state) {
  const int bits = static_cast<int>(state.range(0));
  const auto points = random_points(4096, kCellCount, bits);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(morton_encode(points[i], bits));
    i = (i + 1) % points.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MortonEncode)->Arg(5)->Arg(8)->Arg(10);

void BM_MortonDecode(benchmark::State& state) {
  const auto points = random_points(4096, kCellCount, 8);
  std::vector<std::uint64_t> codes;
  for (const auto& p : points) codes.push_back(morton_encode(p, 8));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(morton_decode(codes[i], kCellCount, 8));
    i = (i + 1) % codes.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MortonDecode);

void BM_DetectEvents(benchmark::State& state) {
  const auto frames = static_cast<std::int64_t>(state.range(0));
  std::vector<FrameActivation> acts(static_cast<std::size_t>(frames));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> coin(0, 9);
  int cell = 0;
  for (std::int64_t t = 0; t < frames; ++t) {
    acts[t].frame = t;
    if (coin(rng) < 3) {
      cell = (cell + 1) % kCellCount;
      acts[t].levels[cell] = 200;
      acts[t].values[cell] = 140.0;
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(detect_events(acts));
  state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_DetectEvents)->Arg(1000)->Arg(100000);

}  // namespace
