#include "sfcevent/features.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "sfcevent/error.hpp"
#include "sfcevent/media_io.hpp"

namespace sfcevent {

std::string_view to_string(Variant v) { return v == Variant::Of ? "of" : "cnn"; }

Variant parse_variant(std::string_view text) {
  if (text == "of") return Variant::Of;
  if (text == "cnn") return Variant::Cnn;
  fail(ErrorCode::ParseError, fmt::format("unknown variant '{}' (expected of|cnn)", text));
}

void OfParams::validate() const {
  if (n < 1 || m < 1) fail(ErrorCode::InvalidParameter, fmt::format("window lengths n={} m={} must be >= 1", n, m));
  if (!(delta > 0.0 && delta <= 180.0)) fail(ErrorCode::InvalidParameter, fmt::format("delta {} not in (0, 180]", delta));
  if (!(alpha >= 0.0 && alpha <= 180.0)) fail(ErrorCode::InvalidParameter, fmt::format("alpha {} not in [0, 180]", alpha));
  if (!(theta > 0.0 && theta <= 90.0)) fail(ErrorCode::InvalidParameter, fmt::format("theta {} not in (0, 90]", theta));
}

void SaliencyParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) fail(ErrorCode::InvalidParameter, fmt::format("gamma {} not in (0, 1)", gamma));
}

double flow_angle(double u, double v) {
  if (u == 0.0 && v == 0.0) return 0.0;
  double deg = std::atan2(u, v) * (180.0 / std::numbers::pi);
  if (deg <= -180.0) deg += 360.0;
  return deg;
}

double angle_difference(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

OfFeatureExtractor::OfFeatureExtractor(OfParams params) : params_(params) { params_.validate(); }

void OfFeatureExtractor::reset() {
  window_.clear();
  started_ = false;
}

CellFeatureVector OfFeatureExtractor::push(const CellFlowMeans& means) {
  if (started_ && means.frame <= last_frame_) {
    fail(ErrorCode::UnorderedInput, fmt::format("frame {} after frame {}", means.frame, last_frame_));
  }
  started_ = true;
  last_frame_ = means.frame;

  const auto span = static_cast<std::size_t>(params_.n + params_.m);
  window_.push_back(means);
  if (window_.size() > span) window_.pop_front();

  CellFeatureVector out;
  out.frame = means.frame;
  out.variant = Variant::Of;
  if (window_.size() < span) return out;

  // window_[0, m) is the baseline, window_[m, m + n) the recent window; both
  // summed oldest first.
  for (int cell = 0; cell < kCellCount; ++cell) {
    double bu = 0.0, bv = 0.0, ru = 0.0, rv = 0.0;
    for (int k = 0; k < params_.m; ++k) {
      bu += window_[k].cells[cell].u;
      bv += window_[k].cells[cell].v;
    }
    for (int k = params_.m; k < params_.m + params_.n; ++k) {
      ru += window_[k].cells[cell].u;
      rv += window_[k].cells[cell].v;
    }
    bu /= params_.m;
    bv /= params_.m;
    ru /= params_.n;
    rv /= params_.n;
    if (ru == 0.0 && rv == 0.0) continue;  // no motion, no evidence

    const double recent = flow_angle(ru, rv);
    const double d = angle_difference(recent, flow_angle(bu, bv));
    const bool event_direction = angle_difference(recent, params_.alpha) <= params_.theta ||
                                 angle_difference(recent, -params_.alpha) <= params_.theta;
    if (d > params_.delta && event_direction) out.values[cell] = d;
  }
  return out;
}

std::vector<CellFeatureVector> of_features(std::span<const CellFlowMeans> history, const OfParams& params) {
  OfFeatureExtractor extractor(params);
  std::vector<CellFeatureVector> out;
  out.reserve(history.size());
  for (const auto& means : history) out.push_back(extractor.push(means));
  return out;
}

CellFeatureVector saliency_feature(const CellSaliencyMeans& means, const SaliencyParams& params) {
  CellFeatureVector out;
  out.frame = means.frame;
  out.variant = Variant::Cnn;
  int best = -1;
  for (int i = 0; i < kCellCount; ++i) {
    if (means.cells[i] >= params.gamma && (best < 0 || means.cells[i] > means.cells[best])) best = i;
  }
  if (best >= 0) out.values[best] = means.cells[best];
  return out;
}

std::vector<CellFeatureVector> saliency_features(std::span<const CellSaliencyMeans> means,
                                                 const SaliencyParams& params) {
  params.validate();
  std::vector<CellFeatureVector> out;
  out.reserve(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (i > 0 && means[i].frame <= means[i - 1].frame) {
      fail(ErrorCode::UnorderedInput, fmt::format("frame {} after frame {}", means[i].frame, means[i - 1].frame));
    }
    out.push_back(saliency_feature(means[i], params));
  }
  return out;
}

std::string format_features_csv(std::span<const CellFeatureVector> rows, Variant variant) {
  std::string out = fmt::format("# variant={}\nframe,f1,f2,f3,f4,f5,f6\n", to_string(variant));
  for (const auto& r : rows) {
    out += fmt::format("{}", r.frame);
    for (double v : r.values) out += fmt::format(",{}", v);
    out += '\n';
  }
  return out;
}

std::vector<CellFeatureVector> parse_features_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_variant = false;
  bool have_header = false;
  Variant variant = Variant::Of;
  std::vector<CellFeatureVector> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "# variant=";
      if (line.starts_with(key)) {
        variant = parse_variant(std::string_view(line).substr(key.size()));
        have_variant = true;
      }
      continue;
    }
    if (!have_header) {
      if (line != "frame,f1,f2,f3,f4,f5,f6") fail(ErrorCode::ParseError, fmt::format("line {}: bad header", line_no));
      have_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 1 + kCellCount) {
      fail(ErrorCode::ParseError, fmt::format("line {}: expected {} fields", line_no, 1 + kCellCount));
    }
    CellFeatureVector r;
    r.variant = variant;
    try {
      r.frame = std::stoll(fields[0]);
      for (int i = 0; i < kCellCount; ++i) r.values[i] = std::stod(fields[1 + i]);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, fmt::format("line {}: malformed number", line_no));
    }
    rows.push_back(r);
  }
  if (!have_variant) fail(ErrorCode::ParseError, "missing '# variant=' line");
  return rows;
}

}  // namespace sfcevent
