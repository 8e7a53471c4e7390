#include "sfcevent/media_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "sfcevent/error.hpp"

namespace sfcevent {
namespace {

constexpr char kMagic[4] = {'F', 'S', 'Q', '1'};

void put_u32(std::vector<std::byte>& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFFu));
}

void put_f32(std::vector<std::byte>& out, float value) { put_u32(out, std::bit_cast<std::uint32_t>(value)); }

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) {
    value |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

float get_f32(std::span<const std::byte> bytes, std::size_t offset) {
  return std::bit_cast<float>(get_u32(bytes, offset));
}

std::vector<std::byte> header(std::uint32_t width, std::uint32_t height, std::uint32_t count, PixelFormat format,
                              std::size_t payload) {
  std::vector<std::byte> out;
  out.reserve(kFseqHeaderSize + payload);
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, width);
  put_u32(out, height);
  put_u32(out, count);
  put_u32(out, static_cast<std::uint32_t>(format));
  put_u32(out, 0);  // reserved, pads the header to 24 bytes
  return out;
}

std::vector<std::byte> read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, fmt::format("cannot open {}", path.string()));
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    fail(ErrorCode::IoFailure, fmt::format("cannot read {}", path.string()));
  }
  return bytes;
}

void write_binary(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, fmt::format("cannot create {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, fmt::format("cannot write {}", path.string()));
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

std::vector<std::byte> encode_fseq(const FrameSequence& seq) {
  if (seq.width <= 0 || seq.height <= 0) fail(ErrorCode::InvalidParameter, "FSEQ geometry must be positive");
  if (seq.format == PixelFormat::FlowF32) fail(ErrorCode::InvalidParameter, "frame sequence cannot use flow format");
  validate(seq);
  const std::size_t pixels = static_cast<std::size_t>(seq.width) * static_cast<std::size_t>(seq.height);
  const std::size_t bpp = seq.format == PixelFormat::Gray8 ? 1 : 4;
  auto out = header(static_cast<std::uint32_t>(seq.width), static_cast<std::uint32_t>(seq.height),
                    static_cast<std::uint32_t>(seq.frames.size()), seq.format, pixels * bpp * seq.frames.size());
  for (const Image& frame : seq.frames) {
    for (float p : frame.pixels()) {
      if (seq.format == PixelFormat::Gray8) {
        out.push_back(static_cast<std::byte>(static_cast<std::uint8_t>(std::lround(p * 255.0f))));
      } else {
        put_f32(out, p);
      }
    }
  }
  return out;
}

std::vector<std::byte> encode_fseq(const FlowSequence& seq) {
  if (seq.width <= 0 || seq.height <= 0) fail(ErrorCode::InvalidParameter, "FSEQ geometry must be positive");
  validate(seq);
  const std::size_t pixels = static_cast<std::size_t>(seq.width) * static_cast<std::size_t>(seq.height);
  auto out = header(static_cast<std::uint32_t>(seq.width), static_cast<std::uint32_t>(seq.height),
                    static_cast<std::uint32_t>(seq.fields.size()), PixelFormat::FlowF32,
                    pixels * 8 * seq.fields.size());
  for (const FlowField& field : seq.fields) {
    auto u = field.u.pixels();
    auto v = field.v.pixels();
    for (std::size_t i = 0; i < pixels; ++i) {
      put_f32(out, u[i]);
      put_f32(out, v[i]);
    }
  }
  return out;
}

FseqPayload decode_fseq(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin(),
                                      [](char c, std::byte b) { return static_cast<std::byte>(c) == b; })) {
    fail(ErrorCode::MagicMismatch, "not an FSEQ file");
  }
  if (bytes.size() < kFseqHeaderSize) fail(ErrorCode::TruncatedPayload, "header shorter than 24 bytes");
  const std::uint32_t width = get_u32(bytes, 4);
  const std::uint32_t height = get_u32(bytes, 8);
  const std::uint32_t count = get_u32(bytes, 12);
  const std::uint32_t channel = get_u32(bytes, 16);
  if (width == 0 || height == 0) fail(ErrorCode::InvalidHeader, fmt::format("zero geometry {}x{}", width, height));
  if (channel > 2) fail(ErrorCode::InvalidHeader, fmt::format("unknown channel_type {}", channel));
  if (width > (1u << 16) || height > (1u << 16)) {
    fail(ErrorCode::InvalidHeader, fmt::format("implausible geometry {}x{}", width, height));
  }

  const auto format = static_cast<PixelFormat>(channel);
  const std::uint64_t pixels = std::uint64_t{width} * height;
  const std::uint64_t bpp = format == PixelFormat::Gray8 ? 1 : (format == PixelFormat::GrayF32 ? 4 : 8);
  const std::uint64_t expected = pixels * bpp * count;
  const std::uint64_t actual = bytes.size() - kFseqHeaderSize;
  if (expected != actual) {
    fail(ErrorCode::TruncatedPayload,
         fmt::format("header declares {} payload bytes ({} frames), file holds {}", expected, count, actual));
  }

  const int w = static_cast<int>(width);
  const int h = static_cast<int>(height);
  std::size_t offset = kFseqHeaderSize;
  if (format == PixelFormat::FlowF32) {
    FlowSequence seq{w, h, {}};
    seq.fields.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
      FlowField field(w, h);
      auto u = field.u.pixels();
      auto v = field.v.pixels();
      for (std::size_t i = 0; i < pixels; ++i, offset += 8) {
        u[i] = get_f32(bytes, offset);
        v[i] = get_f32(bytes, offset + 4);
      }
      seq.fields.push_back(std::move(field));
    }
    validate(seq);
    return seq;
  }

  FrameSequence seq;
  seq.width = w;
  seq.height = h;
  seq.format = format;
  seq.frames.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    Image frame(w, h);
    auto px = frame.pixels();
    if (format == PixelFormat::Gray8) {
      for (std::size_t i = 0; i < pixels; ++i, ++offset) {
        px[i] = static_cast<float>(std::to_integer<std::uint8_t>(bytes[offset])) / 255.0f;
      }
    } else {
      for (std::size_t i = 0; i < pixels; ++i, offset += 4) px[i] = get_f32(bytes, offset);
    }
    seq.frames.push_back(std::move(frame));
  }
  validate(seq);
  return seq;
}

FseqPayload read_fseq(const std::filesystem::path& path) { return decode_fseq(read_binary(path)); }

void write_fseq(const FrameSequence& seq, const std::filesystem::path& path) { write_binary(path, encode_fseq(seq)); }

void write_fseq(const FlowSequence& seq, const std::filesystem::path& path) { write_binary(path, encode_fseq(seq)); }

FrameSequence read_frame_sequence(const std::filesystem::path& path) {
  auto payload = read_fseq(path);
  if (auto* frames = std::get_if<FrameSequence>(&payload)) return std::move(*frames);
  fail(ErrorCode::InvalidPayload, fmt::format("{} holds flow, expected frames", path.string()));
}

FlowSequence read_flow_sequence(const std::filesystem::path& path) {
  auto payload = read_fseq(path);
  if (auto* flows = std::get_if<FlowSequence>(&payload)) return std::move(*flows);
  fail(ErrorCode::InvalidPayload, fmt::format("{} holds frames, expected flow", path.string()));
}

// --- PGM ------------------------------------------------------------------

Image read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_binary(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && static_cast<char>(bytes[pos]) != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(static_cast<char>(bytes[pos])))) {
      token.push_back(static_cast<char>(bytes[pos++]));
    }
    return token;
  };
  auto to_int = [&](const std::string& token) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value <= 0) {
      fail(ErrorCode::UnsupportedPgm, fmt::format("{}: bad header field '{}'", path.string(), token));
    }
    return value;
  };

  const std::string magic = next_token();
  if (magic != "P5") fail(ErrorCode::UnsupportedPgm, fmt::format("{}: magic '{}' is not binary P5", path.string(), magic));
  const int width = to_int(next_token());
  const int height = to_int(next_token());
  const int maxval = to_int(next_token());
  if (maxval != 255) fail(ErrorCode::UnsupportedPgm, fmt::format("{}: maxval {} != 255", path.string(), maxval));
  ++pos;  // single whitespace after maxval

  const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + pixels) fail(ErrorCode::TruncatedPayload, fmt::format("{}: short pixel data", path.string()));
  Image img(width, height);
  auto px = img.pixels();
  for (std::size_t i = 0; i < pixels; ++i) {
    px[i] = static_cast<float>(std::to_integer<std::uint8_t>(bytes[pos + i])) / 255.0f;
  }
  return img;
}

void write_pgm(const Image& img, const std::filesystem::path& path) {
  const std::string head = fmt::format("P5\n{} {}\n255\n", img.width(), img.height());
  std::vector<std::byte> out;
  out.reserve(head.size() + img.size());
  for (char c : head) out.push_back(static_cast<std::byte>(c));
  for (float p : img.pixels()) {
    out.push_back(static_cast<std::byte>(static_cast<std::uint8_t>(std::lround(std::clamp(p, 0.0f, 1.0f) * 255.0f))));
  }
  write_binary(path, out);
}

FrameSequence read_pgm_sequence(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    fail(ErrorCode::IoFailure, fmt::format("{} is not a directory", directory.string()));
  }
  static const std::regex pattern(R"(frame_(\d{6})\.pgm)");
  std::map<int, std::filesystem::path> indexed;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    std::smatch match;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, match, pattern)) {
      indexed.emplace(std::stoi(match[1].str()), entry.path());
    }
  }

  FrameSequence seq;
  seq.format = PixelFormat::Gray8;
  int expected = 0;
  for (const auto& [index, path] : indexed) {
    if (index != expected) {
      fail(ErrorCode::MissingIndex, fmt::format("frame_{:06d}.pgm missing (next present is {:06d})", expected, index));
    }
    Image frame = read_pgm(path);
    if (seq.frames.empty()) {
      seq.width = frame.width();
      seq.height = frame.height();
    } else if (frame.width() != seq.width || frame.height() != seq.height) {
      fail(ErrorCode::GeometryMismatch, fmt::format("{} is {}x{}, expected {}x{}", path.string(), frame.width(),
                                                    frame.height(), seq.width, seq.height));
    }
    seq.frames.push_back(std::move(frame));
    ++expected;
  }
  return seq;
}

// --- annotations -----------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::vector<GroundTruthEvent> parse_annotations(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<GroundTruthEvent> events;

  auto parse_int = [&](const std::string& s) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      fail(ErrorCode::ParseError, fmt::format("row {}: '{}' is not an integer", line_no, s));
    }
    return value;
  };

  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line != "scenario_id,start_frame,end_frame,label") {
        fail(ErrorCode::ParseError, fmt::format("row {}: expected header scenario_id,start_frame,end_frame,label", line_no));
      }
      have_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) fail(ErrorCode::ParseError, fmt::format("row {}: expected 4 fields, got {}", line_no, fields.size()));
    GroundTruthEvent ev{fields[0], parse_int(fields[1]), parse_int(fields[2]), fields[3]};
    if (ev.scenario_id.empty() || ev.label.empty()) {
      fail(ErrorCode::ParseError, fmt::format("row {}: empty scenario_id or label", line_no));
    }
    if (ev.positive()) {
      if (ev.start_frame < 0 || ev.start_frame > ev.end_frame) {
        fail(ErrorCode::ParseError,
             fmt::format("row {}: invalid window [{}, {}]", line_no, ev.start_frame, ev.end_frame));
      }
    } else if (ev.start_frame != -1 || ev.end_frame != -1) {
      fail(ErrorCode::ParseError, fmt::format("row {}: 'none' rows must carry -1,-1", line_no));
    }
    events.push_back(std::move(ev));
  }
  if (!have_header) fail(ErrorCode::ParseError, "missing annotation header");
  return events;
}

std::vector<GroundTruthEvent> read_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text_file(path));
}

void write_annotations(std::span<const GroundTruthEvent> events, const std::filesystem::path& path) {
  std::string text = "scenario_id,start_frame,end_frame,label\n";
  for (const auto& ev : events) {
    text += fmt::format("{},{},{},{}\n", ev.scenario_id, ev.start_frame, ev.end_frame, ev.label);
  }
  write_text_file(path, text);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, fmt::format("cannot create {}", path.string()));
  out << text;
  if (!out) fail(ErrorCode::IoFailure, fmt::format("cannot write {}", path.string()));
}

}  // namespace sfcevent
