#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfcevent/config.hpp"
#include "sfcevent/eval.hpp"
#include "sfcevent/media_io.hpp"
#include "sfcevent/zorder.hpp"

namespace sfcevent {

// --- individual stages ------------------------------------------------------

/// Flow between each consecutive frame pair (N - 1 fields for N frames).
FlowSequence compute_flow(const FrameSequence& frames, const FlowParams& params);

/// Cell means of a flow stream; field k (frame k -> k + 1) is labelled
/// frame k + 1.
std::vector<CellFlowMeans> flow_cell_means(const FlowSequence& flow, const RoiGrid& grid);

/// OF features for frames 0..N-1 where N = cell-mean count + 1; frame 0
/// carries a zero vector.
std::vector<CellFeatureVector> of_feature_stream(std::span<const CellFlowMeans> means, const OfParams& params);

std::vector<CellSaliencyMeans> saliency_cell_means(const FrameSequence& saliency, const RoiGrid& grid);

MortonStream encode_stream(std::span<const CellFeatureVector> features, Variant variant, int bits);

std::vector<EventWindow> detect_stream(const MortonStream& stream, const DetectParams& params, Variant variant);

// --- end-to-end ---------------------------------------------------------------

struct ScenarioInputs {
  std::string id;
  std::optional<FrameSequence> frames;
  std::optional<FlowSequence> flow;
  std::optional<FrameSequence> saliency;
};

struct StageTimings {
  double flow = 0.0;
  double grid_features = 0.0;
  double encode = 0.0;
  double detect = 0.0;

  double total() const { return flow + grid_features + encode + detect; }
};

struct ScenarioResult {
  std::string id;
  std::int64_t frame_count = 0;
  std::vector<CellFlowMeans> flow_means;
  std::vector<CellSaliencyMeans> saliency_means;
  std::vector<CellFeatureVector> features;
  MortonStream morton;
  std::vector<EventWindow> events;
  std::optional<FlowSequence> flow;  // kept when computed and write_flow is set
  StageTimings timings;
};

/// Runs one scenario through grid, features, encoding and detection. Input
/// decoding is not part of the timed region.
ScenarioResult process_scenario(const ScenarioInputs& inputs, const PipelineConfig& config);

struct RunSummary {
  std::vector<ScenarioResult> scenarios;  // ordered by scenario id
  std::optional<MetricsReport> metrics;
  double fps = 0.0;
};

/// Executes the configured run and writes every artifact under
/// config.output_dir. Single-scenario runs write cellmeans.csv, features.csv,
/// morton.csv and events.csv directly there; directory runs write one
/// subdirectory per scenario plus combined events.csv. metrics.csv is
/// written when annotations are configured.
RunSummary run_pipeline(const PipelineConfig& config);

/// Loads one scenario's inputs from the paths in the config (or from
/// frames.fseq / saliency.fseq / flow.fseq inside `dir` in directory mode).
ScenarioInputs load_scenario(const PipelineConfig& config);
ScenarioInputs load_scenario_dir(const std::filesystem::path& dir, const PipelineConfig& config);

void write_scenario_artifacts(const ScenarioResult& result, const PipelineConfig& config,
                              const std::filesystem::path& dir);

}  // namespace sfcevent
