#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sfcevent/image.hpp"

namespace sfcevent {

/// FSEQ container: "FSQ1", u32 width, u32 height, u32 frame_count,
/// u32 channel_type, then row-major frames. Little-endian throughout.
inline constexpr std::size_t kFseqHeaderSize = 24;

using FseqPayload = std::variant<FrameSequence, FlowSequence>;

std::vector<std::byte> encode_fseq(const FrameSequence& seq);
std::vector<std::byte> encode_fseq(const FlowSequence& seq);
FseqPayload decode_fseq(std::span<const std::byte> bytes);

FseqPayload read_fseq(const std::filesystem::path& path);
void write_fseq(const FrameSequence& seq, const std::filesystem::path& path);
void write_fseq(const FlowSequence& seq, const std::filesystem::path& path);

/// Reads an FSEQ holding gray frames or saliency maps (channel_type 0 or 1).
FrameSequence read_frame_sequence(const std::filesystem::path& path);
/// Reads an FSEQ holding flow pairs (channel_type 2).
FlowSequence read_flow_sequence(const std::filesystem::path& path);

/// Loads frame_000000.pgm, frame_000001.pgm, ... (binary P5, maxval 255).
FrameSequence read_pgm_sequence(const std::filesystem::path& directory);
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const Image& img, const std::filesystem::path& path);

struct GroundTruthEvent {
  std::string scenario_id;
  std::int64_t start_frame = -1;
  std::int64_t end_frame = -1;
  std::string label = "none";

  bool positive() const { return label != "none"; }

  friend bool operator==(const GroundTruthEvent&, const GroundTruthEvent&) = default;
};

/// CSV with header scenario_id,start_frame,end_frame,label.
std::vector<GroundTruthEvent> read_annotations(const std::filesystem::path& path);
std::vector<GroundTruthEvent> parse_annotations(const std::string& text);
void write_annotations(std::span<const GroundTruthEvent> events, const std::filesystem::path& path);

// Shared text helpers for the CSV formats of the other modules.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace sfcevent
