#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfcevent/detect.hpp"
#include "sfcevent/features.hpp"
#include "sfcevent/flow.hpp"
#include "sfcevent/roi_grid.hpp"

namespace sfcevent {

/// Declarative form of one pipeline run. File keys are "section.key", e.g.
/// flow.levels or detect.gap_tolerance.
struct PipelineConfig {
  // [input]
  std::filesystem::path frames;       // FSEQ, channel 0/1
  std::filesystem::path saliency;     // FSEQ, channel 1
  std::filesystem::path flow;         // FSEQ, channel 2 (precomputed)
  std::filesystem::path annotations;  // CSV
  std::filesystem::path scenarios;    // directory of scenario subdirectories
  std::string scenario_id = "scenario";
  double frame_rate = 10.0;

  // [pipeline]
  Variant variant = Variant::Of;
  int jobs = 1;
  double iou_threshold = 0.1;

  FlowParams flow_params;
  OfParams of_params;
  SaliencyParams saliency_params;
  RoiFractions roi;
  GapFractions gap;
  int quantizer_bits = 8;
  DetectParams detect_params;

  // [output]
  std::filesystem::path output_dir = "out";
  bool write_flow = false;
  bool log = false;

  /// Throws ConfigError on violated invariants (missing inputs for the
  /// chosen variant, bad parameter values).
  void validate() const;
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Parses "section.key=value".
std::pair<std::string, std::string> parse_override(const std::string& assignment);

/// Builds a config from an optional TOML-style file plus overrides (applied
/// last, so they win). Relative paths inside the file resolve against the
/// file's directory. Unknown keys are a ConfigError.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& overrides = {});
PipelineConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {},
                            const std::filesystem::path& base_dir = {});

/// Renders the config back to the file format (round-trips through
/// parse_config).
std::string format_config(const PipelineConfig& config);

}  // namespace sfcevent
