#include "sfcevent/zorder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "sfcevent/error.hpp"
#include "sfcevent/media_io.hpp"

namespace sfcevent {
namespace {

std::uint64_t max_level(int bits) { return (std::uint64_t{1} << bits) - 1; }

void check_layout(int dims, int bits) {
  if (dims < 1 || bits < 1 || bits > 32 || dims * bits > 64) {
    fail(ErrorCode::InvalidParameter, fmt::format("layout D={} B={} does not fit in 64 bits", dims, bits));
  }
}

}  // namespace

void Quantizer::validate() const {
  check_layout(dims(), bits);
  for (const auto& r : ranges) {
    if (!(r.lo < r.hi)) fail(ErrorCode::InvalidParameter, fmt::format("empty range [{}, {}]", r.lo, r.hi));
  }
}

Quantizer Quantizer::for_of(int bits) { return {bits, std::vector<DimRange>(kCellCount, DimRange{0.0, 180.0})}; }

Quantizer Quantizer::for_cnn(int bits) { return {bits, std::vector<DimRange>(kCellCount, DimRange{0.0, 1.0})}; }

Quantizer Quantizer::for_variant(Variant v, int bits) { return v == Variant::Of ? for_of(bits) : for_cnn(bits); }

std::uint32_t quantize(double value, const DimRange& range, int bits) {
  if (bits < 1 || bits > 32) fail(ErrorCode::InvalidParameter, fmt::format("bits {} not in [1, 32]", bits));
  const double clamped = std::clamp(value, range.lo, range.hi);
  const double scaled = (clamped - range.lo) / (range.hi - range.lo) * static_cast<double>(max_level(bits));
  return static_cast<std::uint32_t>(std::round(scaled));
}

double dequantize(std::uint32_t level, const DimRange& range, int bits) {
  return range.lo + static_cast<double>(level) / static_cast<double>(max_level(bits)) * (range.hi - range.lo);
}

std::uint64_t morton_encode(std::span<const std::uint32_t> coords, int bits) {
  const int dims = static_cast<int>(coords.size());
  check_layout(dims, bits);
  std::uint64_t code = 0;
  for (int d = 0; d < dims; ++d) {
    const std::uint64_t c = coords[d];
    if (c > max_level(bits)) {
      fail(ErrorCode::CoordOverflow, fmt::format("coordinate {} = {} exceeds {} bits", d, c, bits));
    }
    for (int j = 0; j < bits; ++j) code |= ((c >> j) & 1u) << (j * dims + d);
  }
  return code;
}

std::vector<std::uint32_t> morton_decode(std::uint64_t code, int dims, int bits) {
  check_layout(dims, bits);
  const int total = dims * bits;
  if (total < 64 && (code >> total) != 0) {
    fail(ErrorCode::CodeOverflow, fmt::format("code {} exceeds {} bits", code, total));
  }
  std::vector<std::uint32_t> coords(static_cast<std::size_t>(dims), 0);
  for (int j = 0; j < bits; ++j) {
    for (int d = 0; d < dims; ++d) {
      coords[d] |= static_cast<std::uint32_t>((code >> (j * dims + d)) & 1u) << j;
    }
  }
  return coords;
}

std::vector<MortonRecord> encode_features(std::span<const CellFeatureVector> features, const Quantizer& quantizer) {
  quantizer.validate();
  if (quantizer.dims() != kCellCount) {
    fail(ErrorCode::InvalidParameter, fmt::format("quantizer has {} dims, features have {}", quantizer.dims(), kCellCount));
  }
  std::vector<MortonRecord> out;
  out.reserve(features.size());
  std::vector<std::uint32_t> levels(kCellCount);
  for (const auto& f : features) {
    for (int i = 0; i < kCellCount; ++i) levels[i] = quantize(f.values[i], quantizer.ranges[i], quantizer.bits);
    out.push_back({f.frame, morton_encode(levels, quantizer.bits)});
  }
  return out;
}

std::string format_morton_csv(const MortonStream& stream) {
  std::string ranges;
  for (std::size_t i = 0; i < stream.quantizer.ranges.size(); ++i) {
    if (i > 0) ranges += ',';
    ranges += fmt::format("{}:{}", stream.quantizer.ranges[i].lo, stream.quantizer.ranges[i].hi);
  }
  std::string out = fmt::format("# dims={} bits={} ranges={}\nframe,code\n", stream.quantizer.dims(),
                                stream.quantizer.bits, ranges);
  for (const auto& r : stream.records) out += fmt::format("{},{}\n", r.frame, r.code);
  return out;
}

MortonStream parse_morton_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;
  bool have_header = false;
  MortonStream stream;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      int dims = 0;
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
          if (key == "dims") {
            dims = std::stoi(value);
          } else if (key == "bits") {
            stream.quantizer.bits = std::stoi(value);
          } else if (key == "ranges") {
            stream.quantizer.ranges.clear();
            for (const auto& part : split_csv_line(value)) {
              const auto colon = part.find(':');
              if (colon == std::string::npos) throw std::invalid_argument(part);
              stream.quantizer.ranges.push_back({std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1))});
            }
          }
        } catch (const std::exception&) {
          fail(ErrorCode::ParseError, fmt::format("line {}: malformed header field '{}'", line_no, token));
        }
      }
      if (dims != stream.quantizer.dims()) {
        fail(ErrorCode::ParseError, fmt::format("line {}: dims={} but {} ranges", line_no, dims, stream.quantizer.dims()));
      }
      stream.quantizer.validate();
      have_meta = true;
      continue;
    }
    if (!have_header) {
      if (line != "frame,code") fail(ErrorCode::ParseError, fmt::format("line {}: expected header frame,code", line_no));
      have_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    MortonRecord r;
    std::size_t used0 = 0, used1 = 0;
    try {
      if (fields.size() != 2) throw std::invalid_argument(line);
      r.frame = std::stoll(fields[0], &used0);
      if (fields[1].empty() || fields[1].front() == '-') throw std::invalid_argument(line);
      r.code = std::stoull(fields[1], &used1);
      if (used0 != fields[0].size() || used1 != fields[1].size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, fmt::format("line {}: malformed row '{}'", line_no, line));
    }
    const int code_bits = stream.quantizer.dims() * stream.quantizer.bits;
    if (have_meta && code_bits < 64 && (r.code >> code_bits) != 0) {
      fail(ErrorCode::CodeOverflow, fmt::format("line {}: code {} exceeds {} bits", line_no, r.code, code_bits));
    }
    stream.records.push_back(r);
  }
  if (!have_meta) fail(ErrorCode::ParseError, "missing '# dims=... bits=... ranges=...' header");
  if (!have_header) fail(ErrorCode::ParseError, "missing frame,code header");
  return stream;
}

}  // namespace sfcevent
