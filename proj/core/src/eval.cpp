#include "sfcevent/eval.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "sfcevent/error.hpp"

namespace sfcevent {

double temporal_iou(FrameInterval a, FrameInterval b) {
  const std::int64_t inter = std::max<std::int64_t>(0, std::min(a.end, b.end) - std::max(a.start, b.start) + 1);
  const std::int64_t uni = (a.end - a.start + 1) + (b.end - b.start + 1) - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

MetricsReport match_and_score(const PredictedEvents& predicted, std::span<const GroundTruthEvent> truth,
                              double iou_threshold) {
  std::map<std::string, const GroundTruthEvent*> by_id;
  for (const auto& t : truth) {
    if (!by_id.emplace(t.scenario_id, &t).second) {
      fail(ErrorCode::InvalidParameter, fmt::format("scenario '{}' appears twice in the truth", t.scenario_id));
    }
  }
  for (const auto& [id, events] : predicted) {
    if (!by_id.contains(id)) fail(ErrorCode::UnknownScenario, fmt::format("prediction for unknown scenario '{}'", id));
  }

  MetricsReport r;
  double iou_sum = 0.0;
  for (const auto& [id, gt] : by_id) {
    const auto it = predicted.find(id);
    const bool any = it != predicted.end() && !it->second.empty();
    if (!gt->positive()) {
      if (any) {
        ++r.fp;
      } else {
        ++r.tn;
      }
      continue;
    }
    double best = 0.0;
    if (any) {
      for (const auto& ev : it->second) {
        best = std::max(best, temporal_iou({ev.start_frame, ev.end_frame}, {gt->start_frame, gt->end_frame}));
      }
    }
    if (any && best >= iou_threshold) {
      ++r.tp;
      iou_sum += best;
    } else {
      ++r.fn;
    }
  }

  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  r.sensitivity = ratio(r.tp, r.tp + r.fn);
  r.specificity = ratio(r.tn, r.tn + r.fp);
  r.f1 = ratio(2.0 * r.tp, 2.0 * r.tp + r.fp + r.fn);
  r.mean_iou = ratio(iou_sum, r.tp);
  return r;
}

PredictedEvents group_by_scenario(std::span<const ScenarioEvent> events) {
  PredictedEvents out;
  for (const auto& e : events) out[e.scenario_id].push_back(e.window);
  return out;
}

double throughput(std::int64_t frame_count, double elapsed_seconds) {
  if (frame_count < 1) fail(ErrorCode::InvalidTiming, fmt::format("frame count {} < 1", frame_count));
  if (!(elapsed_seconds > 0.0)) fail(ErrorCode::InvalidTiming, fmt::format("elapsed {} s is not positive", elapsed_seconds));
  return static_cast<double>(frame_count) / elapsed_seconds;
}

std::string format_metrics_csv(std::span<const MetricsRow> rows) {
  std::string out = "variant,f1,sensitivity,specificity,mean_iou,fps\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.2f}\n", row.variant, r.f1, r.sensitivity, r.specificity,
                       r.mean_iou, r.fps);
  }
  return out;
}

}  // namespace sfcevent
