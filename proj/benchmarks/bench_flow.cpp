#include <benchmark/benchmark.h>

#include "sfcevent/flow.hpp"
#include "sfcevent/synth.hpp"

using namespace sfcevent;

namespace {

const SyntheticScenario& scene_640() {
  static const SyntheticScenario scene = generate_crossing(640, 480, 60, StartSide::Left, 4.0, 1);
  return scene;
}

void BM_PolynomialExpansion(benchmark::State& state) {
  const Image& frame = scene_640().frames.frames[40];
  const int poly_n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(polynomial_expansion(frame, poly_n, poly_n == 5 ? 1.2 : 1.5));
  state.SetItemsProcessed(state.iterations() * frame.width() * frame.height());
}
BENCHMARK(BM_PolynomialExpansion)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_DenseFlow640x480(benchmark::State& state) {
  const auto& frames = scene_640().frames.frames;
  FlowParams params;
  params.levels = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dense_flow(frames[40], frames[41], params));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DenseFlow640x480)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

// Streaming estimator reuses the previous frame's pyramid and expansion.
void BM_FlowEstimatorStep(benchmark::State& state) {
  const auto& frames = scene_640().frames.frames;
  FlowEstimator estimator;
  std::size_t t = 0;
  estimator.push(frames[t]);
  for (auto _ : state) {
    t = (t + 1) % frames.size();
    if (t == 0) {
      state.PauseTiming();
      estimator.reset();
      estimator.push(frames[0]);
      t = 1;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(estimator.push(frames[t]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FlowEstimatorStep)->Unit(benchmark::kMillisecond);

}  // namespace
