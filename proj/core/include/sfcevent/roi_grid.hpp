#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sfcevent/image.hpp"

namespace sfcevent {

inline constexpr int kCellCount = 6;

/// Region of interest in fractional frame coordinates.
struct RoiFractions {
  double x0 = 0.15;
  double y0 = 0.35;
  double x1 = 0.85;
  double y1 = 0.75;
};

/// Central horizontal band excluded from the grid (focus-of-expansion gap).
struct GapFractions {
  double gx0 = 0.45;
  double gx1 = 0.55;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  std::int64_t area() const { return std::int64_t(width()) * height(); }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// One row of six cells: 1-3 left of the gap, 4-6 right of it. Index 0 of
/// `cells` is cell 1.
struct RoiGrid {
  int frame_width = 0;
  int frame_height = 0;
  RoiFractions roi;
  GapFractions gap;
  std::array<PixelRect, kCellCount> cells;

  /// Left edge of cell 1 and right edge of cell 6, in pixels.
  int left() const { return cells.front().x0; }
  int right() const { return cells.back().x1; }
};

/// Rasterizes the fractional layout: outer edges floor (low) / ceil (high),
/// inner column boundaries split each side into three near-equal integer
/// widths. Throws DegenerateCell on ordering violations or empty cells.
RoiGrid make_grid(int frame_width, int frame_height, const RoiFractions& roi = {}, const GapFractions& gap = {});

struct Vec2 {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct CellFlowMeans {
  std::int64_t frame = 0;
  std::array<Vec2, kCellCount> cells{};
};

struct CellSaliencyMeans {
  std::int64_t frame = 0;
  std::array<double, kCellCount> cells{};
};

/// Mean (u, v) over each cell. Throws GeometryMismatch when the field does
/// not cover the grid and PreconditionFailed on non-finite flow.
CellFlowMeans cell_mean_flow(const FlowField& flow, const RoiGrid& grid, std::int64_t frame = 0);

/// Mean saliency over each cell. The map must match the grid's frame size.
CellSaliencyMeans cell_mean_saliency(const Image& saliency, const RoiGrid& grid, std::int64_t frame = 0);

std::string format_cell_flow_csv(std::span<const CellFlowMeans> rows);
std::string format_cell_saliency_csv(std::span<const CellSaliencyMeans> rows);
std::vector<CellFlowMeans> parse_cell_flow_csv(const std::string& text);

}  // namespace sfcevent
