#pragma once

#include <cstdint>
#include <string>

#include "sfcevent/eval.hpp"
#include "sfcevent/image.hpp"
#include "sfcevent/media_io.hpp"
#include "sfcevent/roi_grid.hpp"

namespace sfcevent {

enum class StartSide { Left, Right };
enum class MoverMotion { Horizontal, Vertical, None };

/// Desk-scale driving scene: a textured background drifting slowly downward
/// (ego-motion) and, optionally, a textured rectangle ("pedestrian") moving
/// across or along the region of interest.
struct SceneSpec {
  int width = 640;
  int height = 480;
  int frame_count = 120;
  MoverMotion motion = MoverMotion::Horizontal;
  StartSide start_side = StartSide::Left;
  double speed = 4.0;  // px per frame
  std::uint64_t seed = 1;
  double drift = 0.1;  // background px per frame, downward
  int lead_in = 12;    // frames the mover stays fully left of the image
  RoiFractions roi;
  GapFractions gap;
  std::string scenario_id = "synthetic";
};

/// Rectangle placement in continuous pixel-edge coordinates (pixel i spans
/// [i, i + 1)). For horizontal movers the center moves as
/// x_start + speed * t from the left; the leading edge reaches x = 0 at
/// frame lead_in.
struct MoverGeometry {
  double width = 0.0;
  double height = 0.0;
  double top = 0.0;
  double x_start = 0.0;
};

MoverGeometry mover_geometry(const SceneSpec& spec);

/// Frames where the mover center lies inside the grid's horizontal extent,
/// clamped to the sequence. Throws GeometryError when the path never enters.
FrameInterval crossing_window(const SceneSpec& spec);

/// First frame at which a horizontal mover has completely left the image,
/// plus `tail` frames.
int full_pass_frame_count(const SceneSpec& spec, int tail = 10);

struct SyntheticScenario {
  FrameSequence frames;    // Gray8-exact intensities
  FrameSequence saliency;  // GrayF32 pseudo-saliency
  GroundTruthEvent truth;
};

SyntheticScenario generate_scene(const SceneSpec& spec);

SyntheticScenario generate_crossing(int width, int height, int frame_count, StartSide start_side,
                                    double speed_px_per_frame, std::uint64_t texture_seed);

std::string_view to_string(StartSide s);
std::string_view to_string(MoverMotion m);

}  // namespace sfcevent
