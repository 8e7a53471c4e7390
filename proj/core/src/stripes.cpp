#include "sfcevent/stripes.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>

#include <fmt/format.h>

#include "sfcevent/detect.hpp"
#include "sfcevent/media_io.hpp"

namespace sfcevent {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 50.0;

constexpr std::array<const char*, kCellCount> kCellColors = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                                             "#d62728", "#9467bd", "#8c564b"};

std::string render_csv(const MortonStream& stream, const std::vector<FrameActivation>& acts, bool overlay) {
  std::string out = overlay ? "frame,code,cell\n" : "frame,code\n";
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    const auto& r = stream.records[i];
    if (r.code == 0) continue;
    if (overlay) {
      out += fmt::format("{},{},{}\n", r.frame, r.code, acts[i].dominant() + 1);
    } else {
      out += fmt::format("{},{}\n", r.frame, r.code);
    }
  }
  return out;
}

std::string render_svg(const MortonStream& stream, const std::vector<FrameActivation>& acts,
                       const StripeOptions& options) {
  std::int64_t f_lo = 0;
  std::int64_t f_hi = 1;
  std::uint64_t c_hi = 1;
  if (!stream.records.empty()) {
    f_lo = stream.records.front().frame;
    f_hi = std::max(stream.records.back().frame, f_lo + 1);
  }
  for (const auto& r : stream.records) c_hi = std::max(c_hi, r.code);

  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto x_of = [&](std::int64_t f) { return kMargin + plot_w * double(f - f_lo) / double(f_hi - f_lo); };
  auto y_of = [&](std::uint64_t c) { return kHeight - kMargin - plot_h * (double(c) / double(c_hi)); };

  std::string out;
  out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                     kWidth, kHeight, kWidth, kHeight);
  if (options.timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out += fmt::format("<!-- generated {} -->\n", buf.data());
  }
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += fmt::format("<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kMargin,
                     kHeight - kMargin, kWidth - kMargin);
  out += fmt::format("<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kMargin,
                     kHeight - kMargin, kMargin);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">frame</text>\n", kWidth / 2,
                     kHeight - 15);
  out += fmt::format("<text x=\"15\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 15 {})\">code</text>\n",
                     kHeight / 2, kHeight / 2);
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">{}</text>\n", kMargin, kHeight - kMargin + 14, f_lo);
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n", kWidth - kMargin,
                     kHeight - kMargin + 14, f_hi);
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n", kMargin - 4,
                     kMargin + 4, c_hi);

  for (const auto& r : stream.records) {
    if (r.code == 0) continue;
    out += fmt::format("<circle class=\"mark\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"black\"/>\n", x_of(r.frame),
                       y_of(r.code));
  }
  if (options.overlay) {
    for (std::size_t i = 0; i < stream.records.size(); ++i) {
      const int cell = acts[i].dominant();
      if (cell < 0) continue;
      const auto& r = stream.records[i];
      out += fmt::format("<circle class=\"overlay\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\" "
                         "fill-opacity=\"0.6\"/>\n",
                         x_of(r.frame), y_of(r.code), kCellColors[static_cast<std::size_t>(cell)]);
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

std::string render_stripes(const MortonStream& stream, const StripeOptions& options) {
  std::vector<FrameActivation> acts;
  if (options.overlay) acts = activations_from_codes(stream.records, stream.quantizer);
  if (options.format == StripeFormat::Csv) return render_csv(stream, acts, options.overlay);
  return render_svg(stream, acts, options);
}

void emit_stripes(const std::filesystem::path& morton_csv, const std::filesystem::path& out,
                  const StripeOptions& options) {
  const MortonStream stream = parse_morton_csv(read_text_file(morton_csv));
  write_text_file(out, render_stripes(stream, options));
}

}  // namespace sfcevent
