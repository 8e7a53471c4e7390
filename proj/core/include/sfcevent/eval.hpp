#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sfcevent/detect.hpp"
#include "sfcevent/media_io.hpp"

namespace sfcevent {

/// Inclusive frame interval.
struct FrameInterval {
  std::int64_t start = 0;
  std::int64_t end = 0;
};

/// |a ∩ b| / |a ∪ b| with frames counted inclusively; 0 when disjoint.
double temporal_iou(FrameInterval a, FrameInterval b);

/// Scenario-level confusion counts plus derived rates. Rates whose
/// denominator is zero are reported as 0.
struct MetricsReport {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double mean_iou = 0.0;
  double fps = 0.0;

  int scenarios() const { return tp + fp + tn + fn; }
};

using PredictedEvents = std::map<std::string, std::vector<EventWindow>>;

/// A positive scenario is a true positive when any prediction reaches
/// iou_threshold against its truth window; a negative scenario is a false
/// positive when anything is predicted. Throws UnknownScenario for
/// predictions without truth and InvalidParameter for duplicate truth rows.
MetricsReport match_and_score(const PredictedEvents& predicted, std::span<const GroundTruthEvent> truth,
                              double iou_threshold = 0.1);

PredictedEvents group_by_scenario(std::span<const ScenarioEvent> events);

/// frame_count / elapsed_seconds; throws InvalidTiming.
double throughput(std::int64_t frame_count, double elapsed_seconds);

struct MetricsRow {
  std::string variant;
  MetricsReport report;
};

/// variant,f1,sensitivity,specificity,mean_iou,fps
std::string format_metrics_csv(std::span<const MetricsRow> rows);

}  // namespace sfcevent
