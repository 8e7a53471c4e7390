#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sfcevent {

/// Single-channel float image, row-major with a top-left origin.
class Image {
 public:
  Image() = default;
  Image(int width, int height, float fill = 0.0f);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  float& at(int x, int y) { return data_[index(x, y)]; }
  float at(int x, int y) const { return data_[index(x, y)]; }

  /// Replicate-border access.
  float clamped(int x, int y) const;

  std::span<float> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const float> row(int y) const {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  std::span<float> pixels() { return data_; }
  std::span<const float> pixels() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Dense displacement field; u is horizontal (positive right), v vertical
/// (positive down), both in pixels.
struct FlowField {
  FlowField() = default;
  FlowField(int w, int h) : width(w), height(h), u(w, h), v(w, h) {}

  int width = 0;
  int height = 0;
  Image u;
  Image v;

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

enum class PixelFormat : std::uint32_t {
  Gray8 = 0,
  GrayF32 = 1,
  FlowF32 = 2,
};

/// Ordered grayscale frames (or saliency maps) sharing one geometry.
/// Intensities lie in [0, 1]. Saliency sequences use PixelFormat::GrayF32.
struct FrameSequence {
  int width = 0;
  int height = 0;
  double frame_rate = 10.0;
  PixelFormat format = PixelFormat::Gray8;
  std::vector<Image> frames;
};

/// Flow fields between consecutive frames; entry k holds the flow from
/// frame k to frame k + 1.
struct FlowSequence {
  int width = 0;
  int height = 0;
  std::vector<FlowField> fields;
};

/// Throws InvalidPayload when geometry or the [0, 1] range is violated.
void validate(const FrameSequence& seq);
/// Throws InvalidPayload on geometry mismatch or non-finite values.
void validate(const FlowSequence& seq);

Image flip_horizontal(const Image& img);

/// Bilinear sample with replicate border.
float sample_bilinear(const Image& img, float x, float y);

}  // namespace sfcevent
