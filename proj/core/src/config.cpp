#include "sfcevent/config.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "sfcevent/error.hpp"
#include "sfcevent/media_io.hpp"

namespace sfcevent {
namespace {

namespace pt = boost::property_tree;

// Drops a trailing "# ..." or "; ..." comment that starts after whitespace
// and outside quotes; ini_parser only understands whole-line comments.
std::string strip_inline_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if ((c == '#' || c == ';') && i > 0 && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line.erase(i);
        break;
      }
    }
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

template <typename T>
T convert(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if constexpr (std::is_same_v<T, bool>) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail(ErrorCode::ConfigError, fmt::format("{} = '{}' is not a boolean", key, value));
  } else {
    in >> out;
    if (in.fail() || !in.eof()) fail(ErrorCode::ConfigError, fmt::format("{} = '{}' is not a valid number", key, value));
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::filesystem::path&)>;

template <typename T>
Setter number(T PipelineConfig::*member) {
  return [member](PipelineConfig& c, const std::string& v, const std::filesystem::path&) { c.*member = convert<T>("", v); };
}

template <typename S, typename T>
Setter nested(S PipelineConfig::*outer, T S::*inner, std::string key) {
  return [outer, inner, key](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
    (c.*outer).*inner = convert<T>(key, v);
  };
}

Setter path(std::filesystem::path PipelineConfig::*member) {
  return [member](PipelineConfig& c, const std::string& v, const std::filesystem::path& base) {
    std::filesystem::path p(v);
    c.*member = (p.is_relative() && !base.empty() && !v.empty()) ? base / p : p;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"input.frames", path(&PipelineConfig::frames)},
      {"input.saliency", path(&PipelineConfig::saliency)},
      {"input.flow", path(&PipelineConfig::flow)},
      {"input.annotations", path(&PipelineConfig::annotations)},
      {"input.scenarios", path(&PipelineConfig::scenarios)},
      {"input.scenario_id", [](PipelineConfig& c, const std::string& v, const auto&) { c.scenario_id = v; }},
      {"input.frame_rate", number(&PipelineConfig::frame_rate)},
      {"pipeline.variant",
       [](PipelineConfig& c, const std::string& v, const auto&) {
         try {
           c.variant = parse_variant(v);
         } catch (const Error& e) {
           fail(ErrorCode::ConfigError, e.what());
         }
       }},
      {"pipeline.jobs", number(&PipelineConfig::jobs)},
      {"pipeline.iou_threshold", number(&PipelineConfig::iou_threshold)},
      {"flow.pyr_scale", nested(&PipelineConfig::flow_params, &FlowParams::pyr_scale, "flow.pyr_scale")},
      {"flow.levels", nested(&PipelineConfig::flow_params, &FlowParams::levels, "flow.levels")},
      {"flow.winsize", nested(&PipelineConfig::flow_params, &FlowParams::winsize, "flow.winsize")},
      {"flow.iterations", nested(&PipelineConfig::flow_params, &FlowParams::iterations, "flow.iterations")},
      {"flow.poly_n", nested(&PipelineConfig::flow_params, &FlowParams::poly_n, "flow.poly_n")},
      {"flow.poly_sigma", nested(&PipelineConfig::flow_params, &FlowParams::poly_sigma, "flow.poly_sigma")},
      {"of.n", nested(&PipelineConfig::of_params, &OfParams::n, "of.n")},
      {"of.m", nested(&PipelineConfig::of_params, &OfParams::m, "of.m")},
      {"of.delta", nested(&PipelineConfig::of_params, &OfParams::delta, "of.delta")},
      {"of.alpha", nested(&PipelineConfig::of_params, &OfParams::alpha, "of.alpha")},
      {"of.theta", nested(&PipelineConfig::of_params, &OfParams::theta, "of.theta")},
      {"saliency.gamma", nested(&PipelineConfig::saliency_params, &SaliencyParams::gamma, "saliency.gamma")},
      {"grid.x0", nested(&PipelineConfig::roi, &RoiFractions::x0, "grid.x0")},
      {"grid.y0", nested(&PipelineConfig::roi, &RoiFractions::y0, "grid.y0")},
      {"grid.x1", nested(&PipelineConfig::roi, &RoiFractions::x1, "grid.x1")},
      {"grid.y1", nested(&PipelineConfig::roi, &RoiFractions::y1, "grid.y1")},
      {"grid.gx0", nested(&PipelineConfig::gap, &GapFractions::gx0, "grid.gx0")},
      {"grid.gx1", nested(&PipelineConfig::gap, &GapFractions::gx1, "grid.gx1")},
      {"quantizer.bits", number(&PipelineConfig::quantizer_bits)},
      {"detect.min_distinct_cells",
       nested(&PipelineConfig::detect_params, &DetectParams::min_distinct_cells, "detect.min_distinct_cells")},
      {"detect.require_both_sides",
       nested(&PipelineConfig::detect_params, &DetectParams::require_both_sides, "detect.require_both_sides")},
      {"detect.max_cell_jump",
       nested(&PipelineConfig::detect_params, &DetectParams::max_cell_jump, "detect.max_cell_jump")},
      {"detect.gap_tolerance",
       nested(&PipelineConfig::detect_params, &DetectParams::gap_tolerance, "detect.gap_tolerance")},
      {"detect.min_event_frames",
       nested(&PipelineConfig::detect_params, &DetectParams::min_event_frames, "detect.min_event_frames")},
      {"output.dir", path(&PipelineConfig::output_dir)},
      {"output.write_flow", number(&PipelineConfig::write_flow)},
  };
  return table;
}

void apply(PipelineConfig& config, const std::string& key, const std::string& value, const std::filesystem::path& base) {
  const auto it = setters().find(key);
  if (it == setters().end()) fail(ErrorCode::ConfigError, fmt::format("unknown config key '{}'", key));
  try {
    it->second(config, unquote(value), base);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, fmt::format("{}: {}", key, e.what()));
  }
}

}  // namespace

void PipelineConfig::validate() const {
  auto check = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, e.what());
    }
  };
  if (scenarios.empty()) {
    if (variant == Variant::Cnn && saliency.empty()) {
      fail(ErrorCode::ConfigError, "variant=cnn requires input.saliency");
    }
    if (variant == Variant::Of && frames.empty() && flow.empty()) {
      fail(ErrorCode::ConfigError, "variant=of requires input.frames or input.flow");
    }
  }
  if (!(frame_rate > 0.0)) fail(ErrorCode::ConfigError, "input.frame_rate must be positive");
  if (jobs < 1) fail(ErrorCode::ConfigError, "pipeline.jobs must be >= 1");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) fail(ErrorCode::ConfigError, "pipeline.iou_threshold not in (0, 1]");
  if (scenario_id.empty() || scenario_id.find(',') != std::string::npos) {
    fail(ErrorCode::ConfigError, "input.scenario_id must be non-empty and comma-free");
  }
  check([&] { flow_params.validate(); });
  check([&] { of_params.validate(); });
  check([&] { saliency_params.validate(); });
  check([&] { detect_params.validate(); });
  check([&] { Quantizer::for_variant(variant, quantizer_bits).validate(); });
  check([&] { make_grid(1000, 1000, roi, gap); });
}

std::pair<std::string, std::string> parse_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::ConfigError, fmt::format("override '{}' is not section.key=value", assignment));
  }
  return {assignment.substr(0, eq), assignment.substr(eq + 1)};
}

PipelineConfig parse_config(const std::string& text, const ConfigOverrides& overrides,
                            const std::filesystem::path& base_dir) {
  PipelineConfig config;
  if (!text.empty()) {
    pt::ptree tree;
    std::istringstream in(strip_inline_comments(text));
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      fail(ErrorCode::ConfigError, fmt::format("line {}: {}", e.line(), e.message()));
    }
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) {
        fail(ErrorCode::ConfigError, fmt::format("key '{}' outside of a section", section));
      }
      for (const auto& [key, value] : body) apply(config, section + "." + key, value.data(), base_dir);
    }
  }
  for (const auto& [key, value] : overrides) apply(config, key, value, {});
  return config;
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& overrides) {
  if (!file) return parse_config("", overrides);
  std::string text;
  try {
    text = read_text_file(*file);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  return parse_config(text, overrides, file->parent_path());
}

std::string format_config(const PipelineConfig& c) {
  std::string out;
  out += "[input]\n";
  if (!c.frames.empty()) out += fmt::format("frames = \"{}\"\n", c.frames.string());
  if (!c.saliency.empty()) out += fmt::format("saliency = \"{}\"\n", c.saliency.string());
  if (!c.flow.empty()) out += fmt::format("flow = \"{}\"\n", c.flow.string());
  if (!c.annotations.empty()) out += fmt::format("annotations = \"{}\"\n", c.annotations.string());
  if (!c.scenarios.empty()) out += fmt::format("scenarios = \"{}\"\n", c.scenarios.string());
  out += fmt::format("scenario_id = \"{}\"\nframe_rate = {}\n\n", c.scenario_id, c.frame_rate);
  out += fmt::format("[pipeline]\nvariant = \"{}\"\njobs = {}\niou_threshold = {}\n\n", to_string(c.variant), c.jobs,
                     c.iou_threshold);
  const auto& f = c.flow_params;
  out += fmt::format("[flow]\npyr_scale = {}\nlevels = {}\nwinsize = {}\niterations = {}\npoly_n = {}\npoly_sigma = {}\n\n",
                     f.pyr_scale, f.levels, f.winsize, f.iterations, f.poly_n, f.poly_sigma);
  const auto& o = c.of_params;
  out += fmt::format("[of]\nn = {}\nm = {}\ndelta = {}\nalpha = {}\ntheta = {}\n\n", o.n, o.m, o.delta, o.alpha, o.theta);
  out += fmt::format("[saliency]\ngamma = {}\n\n", c.saliency_params.gamma);
  out += fmt::format("[grid]\nx0 = {}\ny0 = {}\nx1 = {}\ny1 = {}\ngx0 = {}\ngx1 = {}\n\n", c.roi.x0, c.roi.y0, c.roi.x1,
                     c.roi.y1, c.gap.gx0, c.gap.gx1);
  out += fmt::format("[quantizer]\nbits = {}\n\n", c.quantizer_bits);
  const auto& d = c.detect_params;
  out += fmt::format(
      "[detect]\nmin_distinct_cells = {}\nrequire_both_sides = {}\nmax_cell_jump = {}\ngap_tolerance = {}\n"
      "min_event_frames = {}\n\n",
      d.min_distinct_cells, d.require_both_sides, d.max_cell_jump, d.gap_tolerance, d.min_event_frames);
  out += fmt::format("[output]\ndir = \"{}\"\nwrite_flow = {}\n", c.output_dir.string(), c.write_flow);
  return out;
}

}  // namespace sfcevent
