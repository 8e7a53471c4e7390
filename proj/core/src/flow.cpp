#include "sfcevent/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "sfcevent/error.hpp"

namespace sfcevent {
namespace {

constexpr double kRegularization = 1e-6;
constexpr double kMinDeterminant = 1e-12;

bool odd_at_least_3(int v) { return v >= 3 && v % 2 == 1; }

// Per-pixel normal-equation terms of the displacement solve: G = A^T A and
// h = A^T db, accumulated over the averaging window.
struct MotionTerms {
  float g11, g12, g22, h1, h2;
};

Image downsample_binomial(const Image& img) {
  static constexpr std::array<float, 5> kTaps = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};
  const int w = img.width();
  const int h = img.height();
  const int cw = (w + 1) / 2;
  const int ch = (h + 1) / 2;

  // Horizontal blur evaluated at even columns only.
  Image horiz(cw, h);
  for (int y = 0; y < h; ++y) {
    auto src = img.row(y);
    auto dst = horiz.row(y);
    for (int cx = 0; cx < cw; ++cx) {
      const int x = 2 * cx;
      float acc = 0.0f;
      for (int k = -2; k <= 2; ++k) acc += kTaps[k + 2] * src[std::clamp(x + k, 0, w - 1)];
      dst[cx] = acc;
    }
  }
  Image out(cw, ch);
  for (int cy = 0; cy < ch; ++cy) {
    const int y = 2 * cy;
    auto dst = out.row(cy);
    for (int k = -2; k <= 2; ++k) {
      auto src = horiz.row(std::clamp(y + k, 0, h - 1));
      const float tap = kTaps[k + 2];
      for (int cx = 0; cx < cw; ++cx) dst[cx] += tap * src[cx];
    }
  }
  return out;
}

Image downsample_bilinear(const Image& img, double scale) {
  const int cw = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int ch = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  Image out(cw, ch);
  const auto inv = static_cast<float>(1.0 / scale);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) out.at(x, y) = sample_bilinear(img, static_cast<float>(x) * inv, static_cast<float>(y) * inv);
  }
  return out;
}

// Builds the window-summed terms for the current flow estimate.
// Confidence of constraints within five pixels of the image border, where the
// expansion sees replicated pixels. Same profile as OpenCV's implementation.
float border_weight(int i, int n) {
  static constexpr std::array<float, 5> kProfile = {0.14f, 0.14f, 0.4472f, 0.4472f, 0.4472f};
  const int d = std::min(i, n - 1 - i);
  return d < static_cast<int>(kProfile.size()) ? kProfile[static_cast<std::size_t>(d)] : 1.0f;
}

// Fills `out` (resized to the level) with the per-pixel normal-equation terms.
void motion_terms(const PolyExpansion& r0, const PolyExpansion& r1, const FlowField& flow,
                  std::vector<MotionTerms>& out) {
  const int w = r0.width();
  const int h = r0.height();
  out.resize(std::size_t(w) * h);
  const float max_x = static_cast<float>(w - 1);
  const float max_y = static_cast<float>(h - 1);

  for (int y = 0; y < h; ++y) {
    auto du_row = flow.u.row(y);
    auto dv_row = flow.v.row(y);
    for (int x = 0; x < w; ++x) {
      const float du = du_row[x];
      const float dv = dv_row[x];
      const PolyCoeffs& p0 = r0.at(x, y);

      // Bilinear sample of the second expansion at the displaced position.
      const float sx = std::clamp(static_cast<float>(x) + du, 0.0f, max_x);
      const float sy = std::clamp(static_cast<float>(y) + dv, 0.0f, max_y);
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const float fx = sx - static_cast<float>(x0);
      const float fy = sy - static_cast<float>(y0);
      const float w00 = (1 - fx) * (1 - fy);
      const float w10 = fx * (1 - fy);
      const float w01 = (1 - fx) * fy;
      const float w11 = fx * fy;
      const PolyCoeffs& q00 = r1.at(x0, y0);
      const PolyCoeffs& q10 = r1.at(x1, y0);
      const PolyCoeffs& q01 = r1.at(x0, y1);
      const PolyCoeffs& q11 = r1.at(x1, y1);
      const float bx1 = w00 * q00.bx + w10 * q10.bx + w01 * q01.bx + w11 * q11.bx;
      const float by1 = w00 * q00.by + w10 * q10.by + w01 * q01.by + w11 * q11.by;
      const float a11_1 = w00 * q00.a11 + w10 * q10.a11 + w01 * q01.a11 + w11 * q11.a11;
      const float a12_1 = w00 * q00.a12 + w10 * q10.a12 + w01 * q01.a12 + w11 * q11.a12;
      const float a22_1 = w00 * q00.a22 + w10 * q10.a22 + w01 * q01.a22 + w11 * q11.a22;

      const float a11 = 0.5f * (p0.a11 + a11_1);
      const float a12 = 0.5f * (p0.a12 + a12_1);
      const float a22 = 0.5f * (p0.a22 + a22_1);
      const float db1 = -0.5f * (bx1 - p0.bx) + a11 * du + a12 * dv;
      const float db2 = -0.5f * (by1 - p0.by) + a12 * du + a22 * dv;

      const float s = border_weight(x, w) * border_weight(y, h);
      const float s2 = s * s;
      MotionTerms& m = out[std::size_t(y) * w + x];
      m.g11 = s2 * (a11 * a11 + a12 * a12);
      m.g12 = s2 * (a12 * (a11 + a22));
      m.g22 = s2 * (a12 * a12 + a22 * a22);
      m.h1 = s2 * (a11 * db1 + a12 * db2);
      m.h2 = s2 * (a12 * db1 + a22 * db2);
    }
  }
}

// Sums the terms over a winsize x winsize window (replicate border, 64-bit
// accumulation) and solves the regularized 2x2 system at each pixel, writing
// the result into `flow` (already sized to the level).
void solve_displacement(const std::vector<MotionTerms>& terms, int w, int h, int winsize, FlowField& flow) {
  const int r = winsize / 2;
  using Acc = std::array<double, 5>;
  std::vector<Acc> colsum(static_cast<std::size_t>(w), Acc{});
  auto add_row = [&](int y, double sign) {
    const MotionTerms* row = terms.data() + std::size_t(std::clamp(y, 0, h - 1)) * w;
    for (int x = 0; x < w; ++x) {
      Acc& a = colsum[x];
      a[0] += sign * row[x].g11;
      a[1] += sign * row[x].g12;
      a[2] += sign * row[x].g22;
      a[3] += sign * row[x].h1;
      a[4] += sign * row[x].h2;
    }
  };
  for (int k = -r; k <= r; ++k) add_row(k, 1.0);

  for (int y = 0; y < h; ++y) {
    Acc acc{};
    for (int k = -r; k <= r; ++k) {
      const Acc& c = colsum[std::clamp(k, 0, w - 1)];
      for (int i = 0; i < 5; ++i) acc[i] += c[i];
    }
    auto u_row = flow.u.row(y);
    auto v_row = flow.v.row(y);
    for (int x = 0; x < w; ++x) {
      const double g11 = acc[0] + kRegularization;
      const double g12 = acc[1];
      const double g22 = acc[2] + kRegularization;
      const double det = g11 * g22 - g12 * g12;
      if (det >= kMinDeterminant) {
        const double inv_det = 1.0 / det;
        u_row[x] = static_cast<float>((g22 * acc[3] - g12 * acc[4]) * inv_det);
        v_row[x] = static_cast<float>((g11 * acc[4] - g12 * acc[3]) * inv_det);
      } else {
        u_row[x] = 0.0f;
        v_row[x] = 0.0f;
      }
      const Acc& in = colsum[std::min(x + r + 1, w - 1)];
      const Acc& out = colsum[std::max(x - r, 0)];
      for (int i = 0; i < 5; ++i) acc[i] += in[i] - out[i];
    }
    if (y + 1 < h) {
      add_row(y + r + 1, 1.0);
      add_row(y - r, -1.0);
    }
  }
}

std::vector<FlowEstimator::Level> expand_levels(const Image& frame, const FlowParams& params) {
  std::vector<FlowEstimator::Level> levels;
  for (Image& img : detail::build_pyramid(frame, params)) {
    PolyExpansion poly = polynomial_expansion(img, params.poly_n, params.poly_sigma);
    levels.push_back({std::move(img), std::move(poly)});
  }
  return levels;
}

}  // namespace

void FlowParams::validate() const {
  if (!(pyr_scale > 0.0 && pyr_scale < 1.0)) fail(ErrorCode::InvalidParameter, fmt::format("pyr_scale {} not in (0,1)", pyr_scale));
  if (levels < 1) fail(ErrorCode::InvalidParameter, fmt::format("levels {} < 1", levels));
  if (!odd_at_least_3(winsize)) fail(ErrorCode::InvalidParameter, fmt::format("winsize {} must be odd and >= 3", winsize));
  if (iterations < 1) fail(ErrorCode::InvalidParameter, fmt::format("iterations {} < 1", iterations));
  if (!odd_at_least_3(poly_n)) fail(ErrorCode::InvalidParameter, fmt::format("poly_n {} must be odd and >= 3", poly_n));
  if (!(poly_sigma > 0.0)) fail(ErrorCode::InvalidParameter, fmt::format("poly_sigma {} must be positive", poly_sigma));
}

PolyExpansion polynomial_expansion(const Image& frame, int poly_n, double poly_sigma) {
  if (frame.empty()) fail(ErrorCode::InvalidParameter, "polynomial expansion of an empty frame");
  if (!odd_at_least_3(poly_n)) fail(ErrorCode::InvalidParameter, fmt::format("poly_n {} must be odd and >= 3", poly_n));
  if (!(poly_sigma > 0.0)) fail(ErrorCode::InvalidParameter, "poly_sigma must be positive");

  const int half = poly_n / 2;
  std::vector<double> g(poly_n);
  double s0 = 0, s2 = 0, s4 = 0;
  for (int t = -half; t <= half; ++t) {
    const double wt = std::exp(-double(t * t) / (2.0 * poly_sigma * poly_sigma));
    g[t + half] = wt;
    s0 += wt;
    s2 += wt * t * t;
    s4 += wt * t * t * t * t;
  }

  // Normal equations decouple: x, y and xy are orthogonal to everything else;
  // {1, x^2, y^2} form a 3x3 block.
  const double m00 = s0 * s0, m01 = s2 * s0, m11 = s4 * s0, m12 = s2 * s2;
  const std::array<std::array<double, 3>, 3> block = {{{m00, m01, m01}, {m01, m11, m12}, {m01, m12, m11}}};
  const double det = block[0][0] * (block[1][1] * block[2][2] - block[1][2] * block[2][1]) -
                     block[0][1] * (block[1][0] * block[2][2] - block[1][2] * block[2][0]) +
                     block[0][2] * (block[1][0] * block[2][1] - block[1][1] * block[2][0]);
  std::array<std::array<double, 3>, 3> inv{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
      inv[i][j] = (block[i1][j1] * block[i2][j2] - block[i1][j2] * block[i2][j1]) / det;
    }
  }
  const double inv_lin = 1.0 / (s2 * s0);
  const double inv_cross = 1.0 / (s2 * s2);

  const int w = frame.width();
  const int h = frame.height();

  // Horizontal moments sum_t g(t) t^k f(x + t, y) for k = 0, 1, 2, one plane
  // per k. Rows are padded by replication so the inner loops carry no clamps.
  const std::size_t n = std::size_t(w) * h;
  std::vector<double> m0(n), m1(n), m2(n);
  std::vector<double> padded(std::size_t(w + 2 * half));
  for (int y = 0; y < h; ++y) {
    auto row = frame.row(y);
    for (int x = -half; x < w + half; ++x) padded[std::size_t(x + half)] = row[std::clamp(x, 0, w - 1)];
    double* o0 = m0.data() + std::size_t(y) * w;
    double* o1 = m1.data() + std::size_t(y) * w;
    double* o2 = m2.data() + std::size_t(y) * w;
    std::fill(o0, o0 + w, 0.0);
    std::fill(o1, o1 + w, 0.0);
    std::fill(o2, o2 + w, 0.0);
    for (int t = -half; t <= half; ++t) {
      const double k0 = g[t + half], k1 = k0 * t, k2 = k0 * t * t;
      const double* src = padded.data() + (t + half);
      for (int x = 0; x < w; ++x) {
        o0[x] += k0 * src[x];
        o1[x] += k1 * src[x];
        o2[x] += k2 * src[x];
      }
    }
  }

  PolyExpansion out(w, h);
  std::vector<double> r1(w), rx(w), ry(w), rxx(w), ryy(w), rxy(w);
  for (int y = 0; y < h; ++y) {
    std::fill(r1.begin(), r1.end(), 0.0);
    std::fill(rx.begin(), rx.end(), 0.0);
    std::fill(ry.begin(), ry.end(), 0.0);
    std::fill(rxx.begin(), rxx.end(), 0.0);
    std::fill(ryy.begin(), ryy.end(), 0.0);
    std::fill(rxy.begin(), rxy.end(), 0.0);
    for (int t = -half; t <= half; ++t) {
      const std::size_t off = std::size_t(std::clamp(y + t, 0, h - 1)) * w;
      const double* a0 = m0.data() + off;
      const double* a1 = m1.data() + off;
      const double* a2 = m2.data() + off;
      const double k0 = g[t + half], k1 = k0 * t, k2 = k0 * t * t;
      for (int x = 0; x < w; ++x) {
        r1[x] += k0 * a0[x];
        rx[x] += k0 * a1[x];
        rxx[x] += k0 * a2[x];
        ry[x] += k1 * a0[x];
        ryy[x] += k2 * a0[x];
        rxy[x] += k1 * a1[x];
      }
    }
    for (int x = 0; x < w; ++x) {
      PolyCoeffs& p = out.at(x, y);
      p.c = static_cast<float>(inv[0][0] * r1[x] + inv[0][1] * rxx[x] + inv[0][2] * ryy[x]);
      p.a11 = static_cast<float>(inv[1][0] * r1[x] + inv[1][1] * rxx[x] + inv[1][2] * ryy[x]);
      p.a22 = static_cast<float>(inv[2][0] * r1[x] + inv[2][1] * rxx[x] + inv[2][2] * ryy[x]);
      p.bx = static_cast<float>(rx[x] * inv_lin);
      p.by = static_cast<float>(ry[x] * inv_lin);
      p.a12 = static_cast<float>(0.5 * rxy[x] * inv_cross);
    }
  }
  return out;
}

namespace detail {

Image downsample(const Image& img, double scale) {
  return scale == 0.5 ? downsample_binomial(img) : downsample_bilinear(img, scale);
}

std::vector<Image> build_pyramid(const Image& frame, const FlowParams& params) {
  std::vector<Image> pyramid;
  if (frame.width() < params.poly_n || frame.height() < params.poly_n) {
    // Too small for even one expansion window; still return the frame so the
    // caller produces a (zero) flow of the right size.
    pyramid.push_back(frame);
    return pyramid;
  }
  pyramid.push_back(frame);
  while (static_cast<int>(pyramid.size()) < params.levels) {
    Image next = downsample(pyramid.back(), params.pyr_scale);
    if (next.width() < params.poly_n || next.height() < params.poly_n) break;
    pyramid.push_back(std::move(next));
  }
  return pyramid;
}

FlowField upsample_flow(const FlowField& coarse, int width, int height, double scale) {
  FlowField fine(width, height);
  const auto s = static_cast<float>(scale);
  const auto gain = static_cast<float>(1.0 / scale);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float cx = static_cast<float>(x) * s;
      const float cy = static_cast<float>(y) * s;
      fine.u.at(x, y) = gain * sample_bilinear(coarse.u, cx, cy);
      fine.v.at(x, y) = gain * sample_bilinear(coarse.v, cx, cy);
    }
  }
  return fine;
}

FlowField estimate_flow(const std::vector<FlowEstimator::Level>& prev, const std::vector<FlowEstimator::Level>& next,
                        const FlowParams& params) {
  const int n_levels = static_cast<int>(std::min(prev.size(), next.size()));
  FlowField flow;
  std::vector<MotionTerms> terms;
  for (int k = n_levels - 1; k >= 0; --k) {
    const PolyExpansion& r0 = prev[k].poly;
    const PolyExpansion& r1 = next[k].poly;
    const int w = r0.width();
    const int h = r0.height();
    flow = (k == n_levels - 1) ? FlowField(w, h) : upsample_flow(flow, w, h, params.pyr_scale);
    for (int it = 0; it < params.iterations; ++it) {
      motion_terms(r0, r1, flow, terms);
      solve_displacement(terms, w, h, params.winsize, flow);
    }
  }
  return flow;
}

}  // namespace detail

FlowField dense_flow(const Image& prev, const Image& next, const FlowParams& params) {
  params.validate();
  if (prev.width() != next.width() || prev.height() != next.height()) {
    fail(ErrorCode::GeometryMismatch, fmt::format("frames are {}x{} and {}x{}", prev.width(), prev.height(),
                                                  next.width(), next.height()));
  }
  if (prev.empty()) fail(ErrorCode::InvalidParameter, "empty frames");
  if (prev.width() < params.poly_n || prev.height() < params.poly_n) return FlowField(prev.width(), prev.height());
  return detail::estimate_flow(expand_levels(prev, params), expand_levels(next, params), params);
}

FlowEstimator::FlowEstimator(FlowParams params) : params_(params) { params_.validate(); }

std::optional<FlowField> FlowEstimator::push(const Image& frame) {
  if (frame.empty()) fail(ErrorCode::InvalidParameter, "empty frame");
  if (!previous_.empty() &&
      (previous_.front().image.width() != frame.width() || previous_.front().image.height() != frame.height())) {
    fail(ErrorCode::GeometryMismatch, "frame geometry changed mid-stream");
  }
  std::vector<Level> current;
  if (frame.width() >= params_.poly_n && frame.height() >= params_.poly_n) {
    current = expand_levels(frame, params_);
  } else {
    current.push_back({frame, PolyExpansion{}});
  }

  std::optional<FlowField> result;
  if (!previous_.empty()) {
    if (frame.width() < params_.poly_n || frame.height() < params_.poly_n) {
      result = FlowField(frame.width(), frame.height());
    } else {
      result = detail::estimate_flow(previous_, current, params_);
    }
  }
  previous_ = std::move(current);
  return result;
}

void FlowEstimator::reset() { previous_.clear(); }

}  // namespace sfcevent
