#pragma once

#include <optional>
#include <vector>

#include "sfcevent/image.hpp"

namespace sfcevent {

/// Coarse-to-fine polynomial-expansion flow settings. Defaults are the
/// traffic-event configuration: pyramid ratio 0.5, 3 levels, 15 px averaging
/// window, 3 refinement passes per level, 5 px expansion neighborhood with
/// Gaussian sigma 1.2.
struct FlowParams {
  double pyr_scale = 0.5;
  int levels = 3;
  int winsize = 15;
  int iterations = 3;
  int poly_n = 5;
  double poly_sigma = 1.2;

  /// Throws InvalidParameter when any field is out of range.
  void validate() const;
};

/// Local quadratic model f(x) ~ x^T A x + b^T x + c around one pixel, with
/// x = (column offset, row offset) and A = [[a11, a12], [a12, a22]].
struct PolyCoeffs {
  float c = 0.0f;
  float bx = 0.0f;
  float by = 0.0f;
  float a11 = 0.0f;
  float a12 = 0.0f;
  float a22 = 0.0f;
};

class PolyExpansion {
 public:
  PolyExpansion() = default;
  PolyExpansion(int width, int height) : width_(width), height_(height), coeffs_(std::size_t(width) * height) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  PolyCoeffs& at(int x, int y) { return coeffs_[std::size_t(y) * width_ + x]; }
  const PolyCoeffs& at(int x, int y) const { return coeffs_[std::size_t(y) * width_ + x]; }
  const std::vector<PolyCoeffs>& coeffs() const noexcept { return coeffs_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<PolyCoeffs> coeffs_;
};

/// Gaussian-weighted least-squares quadratic fit over a poly_n x poly_n
/// neighborhood at every pixel (separable, replicate border).
PolyExpansion polynomial_expansion(const Image& frame, int poly_n, double poly_sigma);

/// Dense flow from prev to next. Throws GeometryMismatch if the frames differ
/// in size.
FlowField dense_flow(const Image& prev, const Image& next, const FlowParams& params = {});

/// Streaming variant of dense_flow: caches the pyramid and expansions of the
/// last frame so each new frame is expanded once.
class FlowEstimator {
 public:
  explicit FlowEstimator(FlowParams params = {});

  /// Returns the flow from the previously pushed frame to `frame`, or nullopt
  /// for the first frame.
  std::optional<FlowField> push(const Image& frame);
  void reset();

  const FlowParams& params() const noexcept { return params_; }

  struct Level {
    Image image;
    PolyExpansion poly;
  };

 private:
  FlowParams params_;
  std::vector<Level> previous_;
};

namespace detail {

/// Pyramid levels, finest first. Levels smaller than poly_n on either side
/// are dropped.
std::vector<Image> build_pyramid(const Image& frame, const FlowParams& params);
Image downsample(const Image& img, double scale);
FlowField upsample_flow(const FlowField& coarse, int width, int height, double scale);
FlowField estimate_flow(const std::vector<FlowEstimator::Level>& prev, const std::vector<FlowEstimator::Level>& next,
                        const FlowParams& params);

}  // namespace detail

}  // namespace sfcevent
