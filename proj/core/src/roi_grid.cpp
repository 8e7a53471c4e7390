#include "sfcevent/roi_grid.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "sfcevent/error.hpp"
#include "sfcevent/media_io.hpp"

namespace sfcevent {
namespace {

// fraction * extent, snapped to the nearest integer when within round-off so
// that 0.15 * 640 rasterizes to 96 rather than 95 or 97.
double scaled(double fraction, int extent) {
  const double v = fraction * extent;
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

int low_edge(double fraction, int extent) { return static_cast<int>(std::floor(scaled(fraction, extent))); }
int high_edge(double fraction, int extent) { return static_cast<int>(std::ceil(scaled(fraction, extent))); }

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

RoiGrid make_grid(int frame_width, int frame_height, const RoiFractions& roi, const GapFractions& gap) {
  if (frame_width <= 0 || frame_height <= 0) {
    fail(ErrorCode::DegenerateCell, fmt::format("frame {}x{} has no pixels", frame_width, frame_height));
  }
  if (!in_unit(roi.x0) || !in_unit(roi.x1) || !in_unit(roi.y0) || !in_unit(roi.y1) || !in_unit(gap.gx0) ||
      !in_unit(gap.gx1)) {
    fail(ErrorCode::DegenerateCell, "grid fractions must lie in [0, 1]");
  }
  if (!(roi.x0 < gap.gx0 && gap.gx0 < gap.gx1 && gap.gx1 < roi.x1 && roi.y0 < roi.y1)) {
    fail(ErrorCode::DegenerateCell,
         fmt::format("grid requires x0 < gx0 < gx1 < x1 and y0 < y1 (got {}, {}, {}, {}; {}, {})", roi.x0, gap.gx0,
                     gap.gx1, roi.x1, roi.y0, roi.y1));
  }

  RoiGrid grid;
  grid.frame_width = frame_width;
  grid.frame_height = frame_height;
  grid.roi = roi;
  grid.gap = gap;

  const int left0 = low_edge(roi.x0, frame_width);
  const int left1 = high_edge(gap.gx0, frame_width);
  const int right0 = low_edge(gap.gx1, frame_width);
  const int right1 = high_edge(roi.x1, frame_width);
  const int top = low_edge(roi.y0, frame_height);
  const int bottom = high_edge(roi.y1, frame_height);
  if (right0 < left1) {
    fail(ErrorCode::DegenerateCell, fmt::format("gap rasterizes to overlapping sides ({} < {})", right0, left1));
  }

  // Inner edges are rounded toward the frame border on the left side and
  // measured from the outer edge on the right, so the grid is the mirror
  // image of itself whenever the outer edges are.
  const int left_span = left1 - left0;
  const int right_span = right1 - right0;
  for (int k = 0; k < 3; ++k) {
    grid.cells[k] = PixelRect{left0 + k * left_span / 3, top, left0 + (k + 1) * left_span / 3, bottom};
    grid.cells[3 + k] =
        PixelRect{right1 - (3 - k) * right_span / 3, top, right1 - (2 - k) * right_span / 3, bottom};
  }

  for (int i = 0; i < kCellCount; ++i) {
    if (grid.cells[i].width() <= 0 || grid.cells[i].height() <= 0) {
      fail(ErrorCode::DegenerateCell, fmt::format("cell {} rasterizes to {}x{} px", i + 1, grid.cells[i].width(),
                                                  grid.cells[i].height()));
    }
  }
  return grid;
}

CellFlowMeans cell_mean_flow(const FlowField& flow, const RoiGrid& grid, std::int64_t frame) {
  const PixelRect& last = grid.cells.back();
  if (flow.width < last.x1 || flow.height < last.y1 || flow.u.width() != flow.width || flow.v.width() != flow.width) {
    fail(ErrorCode::GeometryMismatch,
         fmt::format("flow {}x{} does not cover grid extents {}x{}", flow.width, flow.height, last.x1, last.y1));
  }
  CellFlowMeans out;
  out.frame = frame;
  for (int i = 0; i < kCellCount; ++i) {
    const PixelRect& c = grid.cells[i];
    double su = 0.0, sv = 0.0;
    for (int y = c.y0; y < c.y1; ++y) {
      auto u = flow.u.row(y);
      auto v = flow.v.row(y);
      for (int x = c.x0; x < c.x1; ++x) {
        if (!std::isfinite(u[x]) || !std::isfinite(v[x])) {
          fail(ErrorCode::PreconditionFailed, fmt::format("non-finite flow at ({}, {})", x, y));
        }
        su += u[x];
        sv += v[x];
      }
    }
    const auto n = static_cast<double>(c.area());
    out.cells[i] = Vec2{su / n, sv / n};
  }
  return out;
}

CellSaliencyMeans cell_mean_saliency(const Image& saliency, const RoiGrid& grid, std::int64_t frame) {
  if (saliency.width() != grid.frame_width || saliency.height() != grid.frame_height) {
    fail(ErrorCode::GeometryMismatch, fmt::format("saliency {}x{} vs grid frame {}x{}", saliency.width(),
                                                  saliency.height(), grid.frame_width, grid.frame_height));
  }
  CellSaliencyMeans out;
  out.frame = frame;
  for (int i = 0; i < kCellCount; ++i) {
    const PixelRect& c = grid.cells[i];
    double s = 0.0;
    for (int y = c.y0; y < c.y1; ++y) {
      auto row = saliency.row(y);
      for (int x = c.x0; x < c.x1; ++x) s += row[x];
    }
    out.cells[i] = s / static_cast<double>(c.area());
  }
  return out;
}

std::string format_cell_flow_csv(std::span<const CellFlowMeans> rows) {
  std::string out = "frame";
  for (int i = 1; i <= kCellCount; ++i) out += fmt::format(",c{}u,c{}v", i, i);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{}", r.frame);
    for (const Vec2& c : r.cells) out += fmt::format(",{},{}", c.u, c.v);
    out += '\n';
  }
  return out;
}

std::string format_cell_saliency_csv(std::span<const CellSaliencyMeans> rows) {
  std::string out = "frame";
  for (int i = 1; i <= kCellCount; ++i) out += fmt::format(",c{}", i);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{}", r.frame);
    for (double c : r.cells) out += fmt::format(",{}", c);
    out += '\n';
  }
  return out;
}

std::vector<CellFlowMeans> parse_cell_flow_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<CellFlowMeans> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 1 + 2 * kCellCount) {
      fail(ErrorCode::ParseError, fmt::format("line {}: expected {} fields", line_no, 1 + 2 * kCellCount));
    }
    CellFlowMeans r;
    try {
      r.frame = std::stoll(fields[0]);
      for (int i = 0; i < kCellCount; ++i) {
        r.cells[i] = Vec2{std::stod(fields[1 + 2 * i]), std::stod(fields[2 + 2 * i])};
      }
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, fmt::format("line {}: malformed number", line_no));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace sfcevent
