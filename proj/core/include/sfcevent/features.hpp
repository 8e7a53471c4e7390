#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfcevent/roi_grid.hpp"

namespace sfcevent {

enum class Variant { Of, Cnn };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

/// Angle-difference gating. Windows are counted in frames: the recent window
/// holds the last n cell means, the baseline the m before those.
struct OfParams {
  int n = 4;
  int m = 7;
  double delta = 75.0;  // degrees
  double alpha = 90.0;  // degrees
  double theta = 20.0;  // degrees

  void validate() const;
};

struct SaliencyParams {
  double gamma = 0.2;

  static SaliencyParams synthetic() { return {0.2}; }
  static SaliencyParams real_world() { return {0.35}; }

  void validate() const;
};

struct CellFeatureVector {
  std::int64_t frame = 0;
  Variant variant = Variant::Of;
  std::array<double, kCellCount> values{};

  friend bool operator==(const CellFeatureVector&, const CellFeatureVector&) = default;
};

/// Direction of (u, v) as atan2(u, v) in degrees, in (-180, 180]: rightward
/// is +90, leftward -90, downward 0.
double flow_angle(double u, double v);

/// Circular distance between two angles in degrees, folded to [0, 180].
double angle_difference(double a, double b);

/// Streaming angle-difference features. Frames must arrive strictly
/// increasing; until n + m cell means have been seen the output is zero.
class OfFeatureExtractor {
 public:
  explicit OfFeatureExtractor(OfParams params = {});

  CellFeatureVector push(const CellFlowMeans& means);
  void reset();

 private:
  OfParams params_;
  std::deque<CellFlowMeans> window_;
  bool started_ = false;
  std::int64_t last_frame_ = 0;
};

std::vector<CellFeatureVector> of_features(std::span<const CellFlowMeans> history, const OfParams& params = {});

/// Per frame: the single strongest cell with mean >= gamma (lowest index on
/// ties) keeps its value, everything else is zeroed.
CellFeatureVector saliency_feature(const CellSaliencyMeans& means, const SaliencyParams& params);
std::vector<CellFeatureVector> saliency_features(std::span<const CellSaliencyMeans> means,
                                                 const SaliencyParams& params = {});

/// "# variant=of|cnn", header frame,f1..f6, then one row per frame.
std::string format_features_csv(std::span<const CellFeatureVector> rows, Variant variant);
std::vector<CellFeatureVector> parse_features_csv(const std::string& text);

}  // namespace sfcevent
