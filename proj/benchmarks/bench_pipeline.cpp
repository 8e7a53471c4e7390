#include <benchmark/benchmark.h>

#include "sfcevent/pipeline.hpp"
#include "sfcevent/synth.hpp"

using namespace sfcevent;

namespace {

// End-to-end OF pipeline, excluding input decoding; items are frames.
void BM_ProcessScenarioOf(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = w * 3 / 4;
  const auto scene = generate_crossing(w, h, 60, StartSide::Left, 4.0, 1);
  PipelineConfig config;
  config.frames = "bench";
  const ScenarioInputs inputs{"bench", scene.frames, std::nullopt, std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(process_scenario(inputs, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene.frames.frames.size()));
}
BENCHMARK(BM_ProcessScenarioOf)->Arg(160)->Arg(640)->Unit(benchmark::kMillisecond);

void BM_ProcessScenarioCnn(benchmark::State& state) {
  const auto scene = generate_crossing(640, 480, 60, StartSide::Left, 4.0, 1);
  PipelineConfig config;
  config.variant = Variant::Cnn;
  config.saliency = "bench";
  const ScenarioInputs inputs{"bench", std::nullopt, std::nullopt, scene.saliency};
  for (auto _ : state) benchmark::DoNotOptimize(process_scenario(inputs, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene.saliency.frames.size()));
}
BENCHMARK(BM_ProcessScenarioCnn)->Unit(benchmark::kMillisecond);

}  // namespace
