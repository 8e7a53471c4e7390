#pragma once

// Reference implementations used by the unit and acceptance tests. They are
// written from the documented behavior, deliberately by different means than
// the library (brute-force enumeration, dense linear algebra, bit-by-bit
// construction), so agreement is evidence rather than tautology.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sfcevent/detect.hpp"
#include "sfcevent/features.hpp"
#include "sfcevent/flow.hpp"
#include "sfcevent/image.hpp"
#include "sfcevent/roi_grid.hpp"

namespace oracle {

using sfcevent::CellFeatureVector;
using sfcevent::CellFlowMeans;
using sfcevent::DetectParams;
using sfcevent::FrameActivation;
using sfcevent::Image;
using sfcevent::kCellCount;
using sfcevent::OfParams;

// --- Morton -----------------------------------------------------------------

/// Builds the code most-significant bit first: for bit plane j = B-1..0 and
/// dimension d = D-1..0 shift in coords[d]'s bit j.
inline std::uint64_t morton(const std::vector<std::uint32_t>& coords, int bits) {
  const int dims = static_cast<int>(coords.size());
  std::uint64_t code = 0;
  for (int j = bits - 1; j >= 0; --j) {
    for (int d = dims - 1; d >= 0; --d) code = (code << 1) | ((coords[d] >> j) & 1u);
  }
  return code;
}

// --- intervals -----------------------------------------------------------------

/// Frame-by-frame counting of |a ∩ b| / |a ∪ b|.
inline double interval_iou(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
  std::int64_t inter = 0, uni = 0;
  for (std::int64_t f = std::min(a0, b0); f <= std::max(a1, b1); ++f) {
    const bool in_a = f >= a0 && f <= a1;
    const bool in_b = f >= b0 && f <= b1;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

// --- least squares ---------------------------------------------------------------

/// Solves the dense system M x = r by Gaussian elimination with partial
/// pivoting.
template <std::size_t N>
std::array<double, N> solve(std::array<std::array<double, N>, N> m, std::array<double, N> r) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < N; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
    }
    std::swap(m[col], m[piv]);
    std::swap(r[col], r[piv]);
    for (std::size_t row = col + 1; row < N; ++row) {
      const double f = m[row][col] / m[col][col];
      for (std::size_t k = col; k < N; ++k) m[row][k] -= f * m[col][k];
      r[row] -= f * r[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double s = r[i];
    for (std::size_t k = i + 1; k < N; ++k) s -= m[i][k] * x[k];
    x[i] = s / m[i][i];
  }
  return x;
}

/// Gaussian-weighted quadratic fit at (px, py) in the basis
/// {1, x, y, x², y², xy}, replicate border. Returns the fit in the
/// library's coefficient convention (f ≈ a11 x² + 2 a12 xy + a22 y² + ...).
inline sfcevent::PolyCoeffs quadratic_fit(const Image& img, int px, int py, int poly_n, double sigma) {
  const int r = poly_n / 2;
  std::array<std::array<double, 6>, 6> m{};
  std::array<double, 6> rhs{};
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      const std::array<double, 6> basis = {1.0, double(dx), double(dy), double(dx * dx), double(dy * dy),
                                           double(dx * dy)};
      const double f = img.clamped(px + dx, py + dy);
      for (int i = 0; i < 6; ++i) {
        rhs[i] += w * basis[i] * f;
        for (int k = 0; k < 6; ++k) m[i][k] += w * basis[i] * basis[k];
      }
    }
  }
  const auto x = solve<6>(m, rhs);
  sfcevent::PolyCoeffs c;
  c.c = float(x[0]);
  c.bx = float(x[1]);
  c.by = float(x[2]);
  c.a11 = float(x[3]);
  c.a22 = float(x[4]);
  c.a12 = float(x[5] / 2.0);
  return c;
}

// --- images ------------------------------------------------------------------------

/// Uniform noise blurred by a normalized Gaussian (sigma in px), rescaled to
/// [0.1, 0.9].
inline Image smooth_texture(int w, int h, std::uint32_t seed, double sigma = 1.5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Image raw(w, h);
  for (float& p : raw.pixels()) p = dist(rng);
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(2 * r + 1);
  double ks = 0.0;
  for (int i = -r; i <= r; ++i) ks += k[i + r] = std::exp(-i * i / (2 * sigma * sigma));
  for (double& v : k) v /= ks;
  Image tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * raw.clamped(x + i, y);
      tmp.at(x, y) = float(s);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp.clamped(x, y + i);
      out.at(x, y) = float(s);
    }
  const auto [mn, mx] = std::ranges::minmax_element(out.pixels());
  const float lo = *mn, span = *mx - *mn;
  for (float& p : out.pixels()) p = 0.1f + 0.8f * (p - lo) / span;
  return out;
}

/// out(x, y) = img(x - dx, y - dy) with replicate border.
inline Image shifted(const Image& img, int dx, int dy) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.clamped(x - dx, y - dy);
  return out;
}

// --- OF features -------------------------------------------------------------------

/// Recomputes the feature of stream position t from scratch: the baseline is
/// positions t-n-m+1..t-n, the recent window t-n+1..t.
inline CellFeatureVector of_feature_at(const std::vector<CellFlowMeans>& history, std::size_t t,
                                       const OfParams& p) {
  CellFeatureVector out;
  out.frame = history[t].frame;
  out.variant = sfcevent::Variant::Of;
  const std::size_t need = std::size_t(p.n + p.m);
  if (t + 1 < need) return out;
  const std::size_t first = t + 1 - need;
  for (int c = 0; c < kCellCount; ++c) {
    double bu = 0, bv = 0, ru = 0, rv = 0;
    for (std::size_t k = first; k < first + std::size_t(p.m); ++k) {
      bu += history[k].cells[c].u;
      bv += history[k].cells[c].v;
    }
    for (std::size_t k = first + std::size_t(p.m); k <= t; ++k) {
      ru += history[k].cells[c].u;
      rv += history[k].cells[c].v;
    }
    bu /= p.m;
    bv /= p.m;
    ru /= p.n;
    rv /= p.n;
    if (ru == 0.0 && rv == 0.0) continue;
    const double recent = sfcevent::flow_angle(ru, rv);
    const double d = sfcevent::angle_difference(recent, sfcevent::flow_angle(bu, bv));
    const bool near_event = sfcevent::angle_difference(recent, p.alpha) <= p.theta ||
                            sfcevent::angle_difference(recent, -p.alpha) <= p.theta;
    if (d > p.delta && near_event) out.values[c] = d;
  }
  return out;
}

/// Cells switch between a downward regime and two lateral regimes at random,
/// with noise and occasional exact zeros, so gated features occur often.
inline std::vector<CellFlowMeans> random_flow_history(std::mt19937_64& rng, int frames) {
  std::uniform_int_distribution<int> coin(0, 99);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<CellFlowMeans> out;
  std::array<int, kCellCount> regime{};
  for (int t = 0; t < frames; ++t) {
    CellFlowMeans m;
    m.frame = 2 * t + (coin(rng) < 50);  // strictly increasing, irregular spacing
    for (int c = 0; c < kCellCount; ++c) {
      if (coin(rng) < 8) regime[c] = coin(rng) % 3;
      const double u = regime[c] == 0 ? 0.0 : regime[c] == 1 ? 1.5 : -1.5;
      const double v = regime[c] == 0 ? 1.0 : 0.1;
      m.cells[c] = {u + noise(rng), v + noise(rng)};
      if (coin(rng) < 3) m.cells[c] = {0.0, 0.0};
    }
    out.push_back(m);
  }
  return out;
}

// --- detector ----------------------------------------------------------------------

struct Event {
  std::int64_t start = 0;
  std::int64_t end = 0;
  int direction = 0;  // +1 left to right, -1 right to left, 0 unknown

  friend bool operator==(const Event&, const Event&) = default;
};

inline int direction_sign(sfcevent::Direction d) {
  return d == sfcevent::Direction::LeftToRight ? 1 : d == sfcevent::Direction::RightToLeft ? -1 : 0;
}

/// Strongest level wins; among equals the first (lowest) cell.
inline int strongest_cell(const FrameActivation& a) {
  const std::uint32_t top = *std::ranges::max_element(a.levels);
  if (top == 0) return -1;
  for (int c = 0; c < kCellCount; ++c)
    if (a.levels[c] == top) return c;
  return -1;
}

/// Applies the sequential-activation conditions to the active frames in
/// [start, end]. Returns the direction sign, or 2 when the run is rejected.
inline int judge(const std::vector<FrameActivation>& acts, std::int64_t start, std::int64_t end,
                 const DetectParams& p) {
  constexpr int kRejected = 2;
  std::vector<int> seq;
  for (const auto& a : acts) {
    if (a.frame < start || a.frame > end) continue;
    const int c = strongest_cell(a);
    if (c < 0) continue;
    if (seq.empty() || seq.back() != c) seq.push_back(c);
  }
  if (int(seq.size()) < p.min_distinct_cells) return kRejected;
  if (p.require_both_sides) {
    bool left = false, right = false;
    for (int c : seq) (c <= 2 ? left : right) = true;
    if (!left || !right) return kRejected;
  }
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (std::abs(seq[i + 1] - seq[i]) > p.max_cell_jump) return kRejected;
  }
  if (end - start + 1 < p.min_event_frames) return kRejected;
  return seq.front() < seq.back() ? 1 : seq.front() > seq.back() ? -1 : 0;
}

inline std::vector<std::int64_t> active_frames(const std::vector<FrameActivation>& acts) {
  std::vector<std::int64_t> out;
  for (const auto& a : acts)
    if (strongest_cell(a) >= 0) out.push_back(a.frame);
  return out;
}

/// Maximal runs of active frames whose internal gaps are at most `tol`.
inline std::vector<std::pair<std::int64_t, std::int64_t>> runs(const std::vector<FrameActivation>& acts, int tol) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (auto f : active_frames(acts)) {
    if (!out.empty() && f - out.back().second - 1 <= tol) {
      out.back().second = f;
    } else {
      out.emplace_back(f, f);
    }
  }
  return out;
}

/// Enumerates every pair of active frames (i, j) and keeps those that form a
/// maximal run (internal gaps within tolerance, no active frame within
/// tolerance + 1 outside either end) and pass the conditions.
inline std::vector<Event> brute_force_events(const std::vector<FrameActivation>& acts, const DetectParams& p) {
  const auto act = active_frames(acts);
  auto any_active_in = [&](std::int64_t lo, std::int64_t hi) {
    for (auto f : act)
      if (f >= lo && f <= hi) return true;
    return false;
  };
  std::vector<Event> out;
  for (std::size_t i = 0; i < act.size(); ++i) {
    for (std::size_t j = i; j < act.size(); ++j) {
      bool connected = true;
      for (std::size_t k = i; k < j; ++k) connected = connected && act[k + 1] - act[k] - 1 <= p.gap_tolerance;
      if (!connected) break;
      if (any_active_in(act[i] - p.gap_tolerance - 1, act[i] - 1)) continue;
      if (any_active_in(act[j] + 1, act[j] + p.gap_tolerance + 1)) continue;
      const int dir = judge(acts, act[i], act[j], p);
      if (dir != 2) out.push_back({act[i], act[j], dir});
    }
  }
  return out;
}

/// Independent check of one reported event: its bounds are active frames,
/// internal gaps respect the tolerance, it cannot be extended, and the
/// conditions hold with the reported direction.
inline bool validate_event(const std::vector<FrameActivation>& acts, const sfcevent::EventWindow& ev,
                           const DetectParams& p) {
  const auto act = active_frames(acts);
  std::vector<std::int64_t> inside;
  for (auto f : act)
    if (f >= ev.start_frame && f <= ev.end_frame) inside.push_back(f);
  if (inside.empty() || inside.front() != ev.start_frame || inside.back() != ev.end_frame) return false;
  for (std::size_t k = 0; k + 1 < inside.size(); ++k)
    if (inside[k + 1] - inside[k] - 1 > p.gap_tolerance) return false;
  for (auto f : act) {
    if (f < ev.start_frame && ev.start_frame - f - 1 <= p.gap_tolerance) return false;
    if (f > ev.end_frame && f - ev.end_frame - 1 <= p.gap_tolerance) return false;
  }
  return judge(acts, ev.start_frame, ev.end_frame, p) == direction_sign(ev.direction);
}

/// Random activation stream over frames [0, length): bursts of a drifting
/// cell walk interleaved with idle gaps; some frames carry several cells.
inline std::vector<FrameActivation> random_activations(std::mt19937_64& rng, int length, bool singleton = false) {
  std::uniform_int_distribution<int> coin(0, 99);
  std::uniform_int_distribution<int> cell_dist(0, kCellCount - 1);
  std::uniform_int_distribution<std::uint32_t> level(1, 255);
  std::uniform_int_distribution<int> step(-3, 3);
  std::vector<FrameActivation> out;
  int cell = cell_dist(rng);
  bool busy = coin(rng) < 50;
  for (int f = 0; f < length; ++f) {
    if (coin(rng) < 8) busy = !busy;
    FrameActivation a;
    a.frame = f;
    if (busy && coin(rng) < 80) {
      if (coin(rng) < 35) cell = std::clamp(cell + step(rng), 0, kCellCount - 1);
      a.levels[cell] = level(rng);
      if (!singleton && coin(rng) < 20) a.levels[cell_dist(rng)] = level(rng);
      // Equal levels exercise the lowest-index tie-break.
      if (!singleton && coin(rng) < 5) a.levels[cell_dist(rng)] = a.levels[cell];
      for (int c = 0; c < kCellCount; ++c) a.values[c] = a.levels[c] * (180.0 / 255.0);
    }
    // Leave some frames out of the list entirely; they count as inactive.
    if (coin(rng) < 10 && !a.any()) continue;
    out.push_back(a);
  }
  return out;
}

// --- files -------------------------------------------------------------------------

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("sfcevent_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
