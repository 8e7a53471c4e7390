#include "sfcevent/detect.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "sfcevent/error.hpp"
#include "sfcevent/media_io.hpp"

namespace sfcevent {

void DetectParams::validate() const {
  if (min_distinct_cells < 2) fail(ErrorCode::InvalidParameter, "min_distinct_cells must be >= 2");
  if (max_cell_jump < 1) fail(ErrorCode::InvalidParameter, "max_cell_jump must be >= 1");
  if (gap_tolerance < 0) fail(ErrorCode::InvalidParameter, "gap_tolerance must be >= 0");
  if (min_event_frames < 1) fail(ErrorCode::InvalidParameter, "min_event_frames must be >= 1");
}

bool FrameActivation::any() const {
  return std::ranges::any_of(levels, [](std::uint32_t l) { return l > 0; });
}

int FrameActivation::dominant() const {
  int best = -1;
  for (int i = 0; i < kCellCount; ++i) {
    if (levels[i] > 0 && (best < 0 || levels[i] > levels[best])) best = i;
  }
  return best;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::LeftToRight: return "left_to_right";
    case Direction::RightToLeft: return "right_to_left";
    case Direction::Unknown: return "unknown";
  }
  return "unknown";
}

Direction parse_direction(std::string_view text) {
  if (text == "left_to_right") return Direction::LeftToRight;
  if (text == "right_to_left") return Direction::RightToLeft;
  if (text == "unknown") return Direction::Unknown;
  fail(ErrorCode::ParseError, fmt::format("unknown direction '{}'", text));
}

std::vector<FrameActivation> activations_from_codes(std::span<const MortonRecord> stream, const Quantizer& quantizer) {
  quantizer.validate();
  if (quantizer.dims() != kCellCount) {
    fail(ErrorCode::InvalidParameter, fmt::format("expected a {}-dimensional quantizer, got {}", kCellCount, quantizer.dims()));
  }
  std::vector<FrameActivation> out;
  out.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (i > 0 && stream[i].frame <= stream[i - 1].frame) {
      fail(ErrorCode::UnorderedInput, fmt::format("frame {} after frame {}", stream[i].frame, stream[i - 1].frame));
    }
    const auto coords = morton_decode(stream[i].code, kCellCount, quantizer.bits);
    FrameActivation a;
    a.frame = stream[i].frame;
    for (int c = 0; c < kCellCount; ++c) {
      a.levels[c] = coords[c];
      a.values[c] = coords[c] > 0 ? dequantize(coords[c], quantizer.ranges[c], quantizer.bits) : 0.0;
    }
    out.push_back(a);
  }
  return out;
}

namespace {

bool left_side(int cell) { return cell < 3; }

std::optional<EventWindow> confirm_run(std::span<const FrameActivation> run, const DetectParams& params,
                                       Variant variant) {
  std::vector<int> sequence;
  double peak = 0.0;
  for (const auto& a : run) {
    const int cell = a.dominant();
    if (cell < 0) continue;
    if (sequence.empty() || sequence.back() != cell) sequence.push_back(cell);
    peak = std::max(peak, *std::ranges::max_element(a.values));
  }
  if (static_cast<int>(sequence.size()) < params.min_distinct_cells) return std::nullopt;
  if (params.require_both_sides) {
    const bool has_left = std::ranges::any_of(sequence, left_side);
    const bool has_right = std::ranges::any_of(sequence, [](int c) { return !left_side(c); });
    if (!has_left || !has_right) return std::nullopt;
  }
  for (std::size_t i = 1; i < sequence.size(); ++i) {
    if (std::abs(sequence[i] - sequence[i - 1]) > params.max_cell_jump) return std::nullopt;
  }
  EventWindow ev;
  ev.start_frame = run.front().frame;
  ev.end_frame = run.back().frame;
  if (ev.length() < params.min_event_frames) return std::nullopt;
  ev.variant = variant;
  ev.peak_value = peak;
  if (sequence.front() < sequence.back()) {
    ev.direction = Direction::LeftToRight;
  } else if (sequence.front() > sequence.back()) {
    ev.direction = Direction::RightToLeft;
  }
  return ev;
}

}  // namespace

std::vector<EventWindow> detect_events(std::span<const FrameActivation> activations, const DetectParams& params,
                                       Variant variant) {
  params.validate();
  std::vector<FrameActivation> active;
  for (std::size_t i = 0; i < activations.size(); ++i) {
    if (i > 0 && activations[i].frame <= activations[i - 1].frame) {
      fail(ErrorCode::UnorderedInput,
           fmt::format("frame {} after frame {}", activations[i].frame, activations[i - 1].frame));
    }
    if (activations[i].any()) active.push_back(activations[i]);
  }

  std::vector<EventWindow> events;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= active.size(); ++i) {
    const bool split = i == active.size() || active[i].frame - active[i - 1].frame - 1 > params.gap_tolerance;
    if (!split) continue;
    if (auto ev = confirm_run(std::span(active).subspan(begin, i - begin), params, variant)) events.push_back(*ev);
    begin = i;
  }
  return events;
}

std::string format_events_csv(std::span<const ScenarioEvent> events) {
  std::string out = "scenario_id,start_frame,end_frame,variant,direction,peak_value\n";
  for (const auto& e : events) {
    out += fmt::format("{},{},{},{},{},{}\n", e.scenario_id, e.window.start_frame, e.window.end_frame,
                       to_string(e.window.variant), to_string(e.window.direction), e.window.peak_value);
  }
  return out;
}

std::vector<ScenarioEvent> parse_events_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<ScenarioEvent> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line != "scenario_id,start_frame,end_frame,variant,direction,peak_value") {
        fail(ErrorCode::ParseError, fmt::format("line {}: bad events header", line_no));
      }
      have_header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 6) fail(ErrorCode::ParseError, fmt::format("line {}: expected 6 fields", line_no));
    ScenarioEvent e;
    e.scenario_id = f[0];
    try {
      e.window.start_frame = std::stoll(f[1]);
      e.window.end_frame = std::stoll(f[2]);
      e.window.peak_value = std::stod(f[5]);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, fmt::format("line {}: malformed number", line_no));
    }
    e.window.variant = parse_variant(f[3]);
    e.window.direction = parse_direction(f[4]);
    if (e.window.start_frame > e.window.end_frame) {
      fail(ErrorCode::ParseError, fmt::format("line {}: start after end", line_no));
    }
    out.push_back(std::move(e));
  }
  if (!have_header) fail(ErrorCode::ParseError, "missing events header");
  return out;
}

}  // namespace sfcevent
