#include "sfcevent/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "sfcevent/error.hpp"

namespace sfcevent {
namespace {

// Uniform noise box-smoothed `passes` times with radius `radius`, rescaled to
// [lo, hi].
Image texture(int w, int h, std::uint64_t seed, float lo, float hi, int passes, int radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Image img(w, h);
  for (float& p : img.pixels()) p = dist(rng);

  const float taps = static_cast<float>(2 * radius + 1);
  for (int pass = 0; pass < passes; ++pass) {
    Image tmp(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float s = 0.0f;
        for (int k = -radius; k <= radius; ++k) s += img.clamped(x + k, y);
        tmp.at(x, y) = s / taps;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float s = 0.0f;
        for (int k = -radius; k <= radius; ++k) s += tmp.clamped(x, y + k);
        img.at(x, y) = s / taps;
      }
    }
  }
  const auto [mn, mx] = std::ranges::minmax_element(img.pixels());
  const float min = *mn;
  const float range = std::max(*mx - min, 1e-6f);
  for (float& p : img.pixels()) p = lo + (hi - lo) * (p - min) / range;
  return img;
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

float to_u8_level(float v) { return std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0f; }

void check_spec(const SceneSpec& spec) {
  if (spec.width < 64 || spec.height < 64) {
    fail(ErrorCode::GeometryError, fmt::format("scene {}x{} is smaller than 64x64", spec.width, spec.height));
  }
  if (spec.frame_count < 1) fail(ErrorCode::GeometryError, "frame_count must be >= 1");
  if (spec.motion != MoverMotion::None && !(spec.speed > 0.0)) {
    fail(ErrorCode::GeometryError, fmt::format("speed {} px/frame never moves the mover", spec.speed));
  }
  if (spec.drift < 0.0) fail(ErrorCode::GeometryError, "background drift must be nonnegative");
  if (spec.lead_in < 0) fail(ErrorCode::GeometryError, "lead_in must be nonnegative");
}

}  // namespace

std::string_view to_string(StartSide s) { return s == StartSide::Left ? "left" : "right"; }

std::string_view to_string(MoverMotion m) {
  switch (m) {
    case MoverMotion::Horizontal: return "horizontal";
    case MoverMotion::Vertical: return "vertical";
    case MoverMotion::None: return "none";
  }
  return "none";
}

MoverGeometry mover_geometry(const SceneSpec& spec) {
  const RoiGrid grid = make_grid(spec.width, spec.height, spec.roi, spec.gap);
  const double band_top = grid.cells[0].y0;
  const double band = grid.cells[0].height();
  MoverGeometry g;
  g.width = std::round(0.075 * spec.width);
  g.height = std::round(0.85 * band);
  g.top = band_top + 0.5 * (band - g.height);
  g.x_start = -0.5 * g.width - spec.lead_in * spec.speed;
  return g;
}

int full_pass_frame_count(const SceneSpec& spec, int tail) {
  if (!(spec.speed > 0.0)) fail(ErrorCode::GeometryError, "speed must be positive");
  const MoverGeometry g = mover_geometry(spec);
  const double leave = (spec.width - (g.x_start - 0.5 * g.width)) / spec.speed;
  return static_cast<int>(std::ceil(leave)) + std::max(tail, 0);
}

FrameInterval crossing_window(const SceneSpec& spec) {
  check_spec(spec);
  if (spec.motion != MoverMotion::Horizontal) fail(ErrorCode::GeometryError, "only horizontal movers cross the RoI");
  const RoiGrid grid = make_grid(spec.width, spec.height, spec.roi, spec.gap);
  const MoverGeometry g = mover_geometry(spec);
  const auto entry = static_cast<std::int64_t>(std::ceil((grid.left() - g.x_start) / spec.speed));
  auto exit = static_cast<std::int64_t>(std::floor((grid.right() - g.x_start) / spec.speed));
  if (entry > spec.frame_count - 1) {
    fail(ErrorCode::GeometryError, fmt::format("mover reaches the RoI at frame {} but the scene ends at {}", entry,
                                               spec.frame_count - 1));
  }
  exit = std::min<std::int64_t>(exit, spec.frame_count - 1);
  return {entry, exit};
}

SyntheticScenario generate_scene(const SceneSpec& spec) {
  check_spec(spec);
  if (spec.start_side == StartSide::Right) {
    SceneSpec left = spec;
    left.start_side = StartSide::Left;
    SyntheticScenario s = generate_scene(left);
    for (Image& f : s.frames.frames) f = flip_horizontal(f);
    for (Image& f : s.saliency.frames) f = flip_horizontal(f);
    if (s.truth.positive()) s.truth.label = "crossing_rl";
    return s;
  }

  const int w = spec.width;
  const int h = spec.height;
  const RoiGrid grid = make_grid(w, h, spec.roi, spec.gap);
  const MoverGeometry g = mover_geometry(spec);

  const int travel = static_cast<int>(std::ceil(spec.drift * spec.frame_count)) + 2;
  const Image background = texture(w, h + travel, spec.seed, 0.10f, 0.45f, 2, 2);
  const Image body = texture(static_cast<int>(g.width), static_cast<int>(g.height), spec.seed + 0x9E3779B97F4A7C15ull,
                             0.60f, 0.95f, 1, 1);

  // Constant attention at the focus of expansion (center of the gap).
  const double foe_x = 0.5 * (grid.cells[2].x1 + grid.cells[3].x0);
  const double foe_y = 0.5 * (grid.cells[0].y0 + grid.cells[0].y1);
  const double foe_sigma = std::max(1.0, 0.25 * (grid.cells[3].x0 - grid.cells[2].x1));

  SyntheticScenario out;
  out.frames.width = out.saliency.width = w;
  out.frames.height = out.saliency.height = h;
  out.frames.format = PixelFormat::Gray8;
  out.saliency.format = PixelFormat::GrayF32;

  for (int t = 0; t < spec.frame_count; ++t) {
    double left = 0.0, top = g.top;
    switch (spec.motion) {
      case MoverMotion::Horizontal:
        left = g.x_start + spec.speed * t - 0.5 * g.width;
        break;
      case MoverMotion::Vertical:
        left = 0.5 * (grid.cells[1].x0 + grid.cells[1].x1) - 0.5 * g.width;
        top = grid.cells[0].y0 - g.height + spec.speed * t;
        break;
      case MoverMotion::None:
        left = -1e9;
        break;
    }
    const double right = left + g.width;
    const double bottom = top + g.height;
    const double cx = 0.5 * (left + right);
    const double cy = 0.5 * (top + bottom);
    const double offset = travel - 1 - spec.drift * t;

    Image frame(w, h);
    Image sal(w, h);
    for (int y = 0; y < h; ++y) {
      const double cov_y = overlap(y, y + 1, top, bottom);
      for (int x = 0; x < w; ++x) {
        float value = sample_bilinear(background, static_cast<float>(x), static_cast<float>(y + offset));
        const double cov = cov_y * overlap(x, x + 1, left, right);
        if (cov > 0.0) {
          const float tex = sample_bilinear(body, static_cast<float>(x - left), static_cast<float>(y - top));
          value = static_cast<float>(cov * tex + (1.0 - cov) * value);
        }
        frame.at(x, y) = to_u8_level(value);

        double s = 0.6 * std::exp(-0.5 * (std::pow((x + 0.5 - foe_x) / foe_sigma, 2) +
                                          std::pow((y + 0.5 - foe_y) / (2.0 * foe_sigma), 2)));
        if (spec.motion != MoverMotion::None) {
          const double dx = (x + 0.5 - cx) / (0.5 * g.width);
          const double dy = (y + 0.5 - cy) / (0.5 * g.height);
          s = std::max(s, std::exp(-0.5 * (dx * dx + dy * dy)));
        }
        sal.at(x, y) = static_cast<float>(std::clamp(s, 0.0, 1.0));
      }
    }
    out.frames.frames.push_back(std::move(frame));
    out.saliency.frames.push_back(std::move(sal));
  }

  out.truth.scenario_id = spec.scenario_id;
  if (spec.motion == MoverMotion::Horizontal) {
    const FrameInterval gt = crossing_window(spec);
    out.truth.start_frame = gt.start;
    out.truth.end_frame = gt.end;
    out.truth.label = "crossing_lr";
  }
  return out;
}

SyntheticScenario generate_crossing(int width, int height, int frame_count, StartSide start_side,
                                    double speed_px_per_frame, std::uint64_t texture_seed) {
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.frame_count = frame_count;
  spec.start_side = start_side;
  spec.speed = speed_px_per_frame;
  spec.seed = texture_seed;
  spec.motion = MoverMotion::Horizontal;
  crossing_window(spec);  // validates that the path crosses
  return generate_scene(spec);
}

}  // namespace sfcevent
