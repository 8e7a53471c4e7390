#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfcevent/features.hpp"

namespace sfcevent {

struct DimRange {
  double lo = 0.0;
  double hi = 1.0;

  friend bool operator==(const DimRange&, const DimRange&) = default;
};

/// Uniform scalar quantizer, one range per dimension.
struct Quantizer {
  int bits = 8;
  std::vector<DimRange> ranges;

  int dims() const { return static_cast<int>(ranges.size()); }
  void validate() const;

  /// Six angle-difference dimensions over [0, 180] degrees.
  static Quantizer for_of(int bits = 8);
  /// Six mean-saliency dimensions over [0, 1].
  static Quantizer for_cnn(int bits = 8);
  static Quantizer for_variant(Variant v, int bits = 8);

  friend bool operator==(const Quantizer&, const Quantizer&) = default;
};

/// round((clamp(value) - lo) / (hi - lo) * (2^bits - 1)), halves away from zero.
std::uint32_t quantize(double value, const DimRange& range, int bits);
double dequantize(std::uint32_t level, const DimRange& range, int bits);

/// Bit j of dimension d goes to output bit j * D + d.
std::uint64_t morton_encode(std::span<const std::uint32_t> coords, int bits);
std::vector<std::uint32_t> morton_decode(std::uint64_t code, int dims, int bits);

struct MortonRecord {
  std::int64_t frame = 0;
  std::uint64_t code = 0;

  friend bool operator==(const MortonRecord&, const MortonRecord&) = default;
};

std::vector<MortonRecord> encode_features(std::span<const CellFeatureVector> features, const Quantizer& quantizer);

struct MortonStream {
  Quantizer quantizer;
  std::vector<MortonRecord> records;
};

/// Header comment "# dims=D bits=B ranges=lo:hi,..." then frame,code rows.
std::string format_morton_csv(const MortonStream& stream);
MortonStream parse_morton_csv(const std::string& text);

}  // namespace sfcevent
