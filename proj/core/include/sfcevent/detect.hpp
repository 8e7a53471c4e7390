#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfcevent/zorder.hpp"

namespace sfcevent {

/// Sequential-activation rule. A run of activity is an event when its
/// sequence of distinct successive dominant cells is long enough, touches
/// both sides of the gap, never jumps more than max_cell_jump cells, and the
/// run lasts at least min_event_frames frames.
struct DetectParams {
  int min_distinct_cells = 3;
  bool require_both_sides = true;
  int max_cell_jump = 2;
  int gap_tolerance = 10;
  int min_event_frames = 5;

  void validate() const;
};

/// Decoded cell state of one frame. A cell is active when its quantized
/// level is nonzero.
struct FrameActivation {
  std::int64_t frame = 0;
  std::array<std::uint32_t, kCellCount> levels{};
  std::array<double, kCellCount> values{};

  bool any() const;
  bool active(int cell) const { return levels[cell] > 0; }
  /// 0-based index of the strongest active cell (lowest index on ties), or -1.
  int dominant() const;
};

enum class Direction { LeftToRight, RightToLeft, Unknown };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

struct EventWindow {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  Variant variant = Variant::Of;
  Direction direction = Direction::Unknown;
  double peak_value = 0.0;

  std::int64_t length() const { return end_frame - start_frame + 1; }

  friend bool operator==(const EventWindow&, const EventWindow&) = default;
};

std::vector<FrameActivation> activations_from_codes(std::span<const MortonRecord> stream, const Quantizer& quantizer);

/// Frames must be strictly increasing; frames absent from the list count as
/// inactive.
std::vector<EventWindow> detect_events(std::span<const FrameActivation> activations, const DetectParams& params = {},
                                       Variant variant = Variant::Of);

struct ScenarioEvent {
  std::string scenario_id;
  EventWindow window;
};

/// scenario_id,start_frame,end_frame,variant,direction,peak_value
std::string format_events_csv(std::span<const ScenarioEvent> events);
std::vector<ScenarioEvent> parse_events_csv(const std::string& text);

}  // namespace sfcevent
