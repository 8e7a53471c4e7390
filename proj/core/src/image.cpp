#include "sfcevent/image.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sfcevent/error.hpp"

namespace sfcevent {

Image::Image(int width, int height, float fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) fail(ErrorCode::InvalidParameter, "negative image size");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

float Image::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

void validate(const FrameSequence& seq) {
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const Image& f = seq.frames[t];
    if (f.width() != seq.width || f.height() != seq.height) {
      fail(ErrorCode::InvalidPayload,
           fmt::format("frame {} is {}x{}, sequence is {}x{}", t, f.width(), f.height(), seq.width, seq.height));
    }
    for (float p : f.pixels()) {
      if (!(p >= 0.0f && p <= 1.0f)) {
        fail(ErrorCode::InvalidPayload, fmt::format("frame {} has intensity {} outside [0, 1]", t, p));
      }
    }
  }
}

void validate(const FlowSequence& seq) {
  for (std::size_t t = 0; t < seq.fields.size(); ++t) {
    const FlowField& f = seq.fields[t];
    if (f.width != seq.width || f.height != seq.height || f.u.width() != f.width || f.u.height() != f.height ||
        f.v.width() != f.width || f.v.height() != f.height) {
      fail(ErrorCode::InvalidPayload, fmt::format("flow field {} geometry mismatch", t));
    }
    auto finite = [](float x) { return std::isfinite(x); };
    if (!std::ranges::all_of(f.u.pixels(), finite) || !std::ranges::all_of(f.v.pixels(), finite)) {
      fail(ErrorCode::InvalidPayload, fmt::format("flow field {} has non-finite values", t));
    }
  }
}

Image flip_horizontal(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    std::reverse_copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

float sample_bilinear(const Image& img, float x, float y) {
  const float cx = std::clamp(x, 0.0f, static_cast<float>(img.width() - 1));
  const float cy = std::clamp(y, 0.0f, static_cast<float>(img.height() - 1));
  const int x0 = static_cast<int>(cx);
  const int y0 = static_cast<int>(cy);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const float fx = cx - static_cast<float>(x0);
  const float fy = cy - static_cast<float>(y0);
  const float top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
  const float bot = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
  return top + fy * (bot - top);
}

}  // namespace sfcevent
