#pragma once

#include <filesystem>
#include <string>

#include "sfcevent/zorder.hpp"

namespace sfcevent {

enum class StripeFormat { Svg, Csv };

struct StripeOptions {
  StripeFormat format = StripeFormat::Svg;
  bool overlay = false;    // add dominant-cell dots decoded from the codes
  bool timestamp = true;   // SVG only: leading generation-time comment
};

/// Scatter of (frame, raw code) with one mark per nonzero code.
std::string render_stripes(const MortonStream& stream, const StripeOptions& options = {});

/// Reads a Morton CSV and writes the rendered plot to `out`.
void emit_stripes(const std::filesystem::path& morton_csv, const std::filesystem::path& out,
                  const StripeOptions& options = {});

}  // namespace sfcevent
