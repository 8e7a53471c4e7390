#include "sfcevent/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "sfcevent/error.hpp"

namespace sfcevent {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Re-throws module errors with the scenario and stage prepended.
template <typename Fn>
auto stage(const std::string& scenario, const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(e.code(), fmt::format("scenario '{}', stage {}: {}", scenario, name, e.message()));
  }
}

}  // namespace

FlowSequence compute_flow(const FrameSequence& frames, const FlowParams& params) {
  FlowSequence out{frames.width, frames.height, {}};
  FlowEstimator estimator(params);
  for (const Image& frame : frames.frames) {
    if (auto flow = estimator.push(frame)) out.fields.push_back(std::move(*flow));
  }
  return out;
}

std::vector<CellFlowMeans> flow_cell_means(const FlowSequence& flow, const RoiGrid& grid) {
  std::vector<CellFlowMeans> out;
  out.reserve(flow.fields.size());
  for (std::size_t k = 0; k < flow.fields.size(); ++k) {
    out.push_back(cell_mean_flow(flow.fields[k], grid, static_cast<std::int64_t>(k) + 1));
  }
  return out;
}

std::vector<CellFeatureVector> of_feature_stream(std::span<const CellFlowMeans> means, const OfParams& params) {
  std::vector<CellFeatureVector> out;
  if (means.empty()) return out;
  out.reserve(means.size() + 1);
  CellFeatureVector first;
  first.frame = means.front().frame - 1;
  first.variant = Variant::Of;
  out.push_back(first);
  for (auto& f : of_features(means, params)) out.push_back(f);
  return out;
}

std::vector<CellSaliencyMeans> saliency_cell_means(const FrameSequence& saliency, const RoiGrid& grid) {
  std::vector<CellSaliencyMeans> out;
  out.reserve(saliency.frames.size());
  for (std::size_t t = 0; t < saliency.frames.size(); ++t) {
    out.push_back(cell_mean_saliency(saliency.frames[t], grid, static_cast<std::int64_t>(t)));
  }
  return out;
}

MortonStream encode_stream(std::span<const CellFeatureVector> features, Variant variant, int bits) {
  MortonStream stream;
  stream.quantizer = Quantizer::for_variant(variant, bits);
  stream.records = encode_features(features, stream.quantizer);
  return stream;
}

std::vector<EventWindow> detect_stream(const MortonStream& stream, const DetectParams& params, Variant variant) {
  return detect_events(activations_from_codes(stream.records, stream.quantizer), params, variant);
}

ScenarioResult process_scenario(const ScenarioInputs& in, const PipelineConfig& config) {
  ScenarioResult r;
  r.id = in.id;
  const std::string& id = in.id;

  if (config.variant == Variant::Of) {
    if (!in.flow && !in.frames) fail(ErrorCode::ConfigError, fmt::format("scenario '{}': OF variant needs frames or flow", id));
    const int w = in.flow ? in.flow->width : in.frames->width;
    const int h = in.flow ? in.flow->height : in.frames->height;
    const RoiGrid grid = stage(id, "grid", [&] { return make_grid(w, h, config.roi, config.gap); });
    OfFeatureExtractor extractor(config.of_params);

    auto consume = [&](const FlowField& field, std::int64_t frame) {
      const auto t0 = Clock::now();
      const CellFlowMeans means = stage(id, "grid", [&] { return cell_mean_flow(field, grid, frame); });
      r.flow_means.push_back(means);
      r.features.push_back(stage(id, "features", [&] { return extractor.push(means); }));
      r.timings.grid_features += seconds_since(t0);
    };
    auto push_zero_frame = [&] {
      CellFeatureVector zero;
      zero.variant = Variant::Of;
      r.features.push_back(zero);
    };

    if (in.flow) {
      stage(id, "flow", [&] { validate(*in.flow); });
      if (!in.flow->fields.empty()) {
        r.frame_count = static_cast<std::int64_t>(in.flow->fields.size()) + 1;
        push_zero_frame();
        for (std::size_t k = 0; k < in.flow->fields.size(); ++k) consume(in.flow->fields[k], std::int64_t(k) + 1);
      }
    } else {
      r.frame_count = static_cast<std::int64_t>(in.frames->frames.size());
      FlowEstimator estimator(config.flow_params);
      if (config.write_flow) r.flow = FlowSequence{w, h, {}};
      for (std::size_t t = 0; t < in.frames->frames.size(); ++t) {
        const auto t0 = Clock::now();
        auto field = stage(id, "flow", [&] { return estimator.push(in.frames->frames[t]); });
        r.timings.flow += seconds_since(t0);
        if (!field) {
          push_zero_frame();
          continue;
        }
        consume(*field, static_cast<std::int64_t>(t));
        if (r.flow) r.flow->fields.push_back(std::move(*field));
      }
    }
  } else {
    if (!in.saliency) fail(ErrorCode::ConfigError, fmt::format("scenario '{}': CNN variant needs saliency maps", id));
    const FrameSequence& sal = *in.saliency;
    r.frame_count = static_cast<std::int64_t>(sal.frames.size());
    const RoiGrid grid = stage(id, "grid", [&] { return make_grid(sal.width, sal.height, config.roi, config.gap); });
    const auto t0 = Clock::now();
    r.saliency_means = stage(id, "grid", [&] { return saliency_cell_means(sal, grid); });
    r.features = stage(id, "features", [&] { return saliency_features(r.saliency_means, config.saliency_params); });
    r.timings.grid_features += seconds_since(t0);
  }

  auto t0 = Clock::now();
  r.morton = stage(id, "encode", [&] { return encode_stream(r.features, config.variant, config.quantizer_bits); });
  r.timings.encode = seconds_since(t0);
  t0 = Clock::now();
  r.events = stage(id, "detect", [&] { return detect_stream(r.morton, config.detect_params, config.variant); });
  r.timings.detect = seconds_since(t0);

  if (config.log) {
    const double total = r.timings.total();
    fmt::print(stderr,
               "[{}] frames={} flow={:.3f}s grid+features={:.3f}s encode={:.4f}s detect={:.4f}s events={} fps={:.2f}\n",
               id, r.frame_count, r.timings.flow, r.timings.grid_features, r.timings.encode, r.timings.detect,
               r.events.size(), (r.frame_count > 0 && total > 0) ? throughput(r.frame_count, total) : 0.0);
  }
  return r;
}

ScenarioInputs load_scenario(const PipelineConfig& config) {
  ScenarioInputs in;
  in.id = config.scenario_id;
  if (config.variant == Variant::Of) {
    if (!config.flow.empty()) {
      in.flow = stage(in.id, "load", [&] { return read_flow_sequence(config.flow); });
    } else {
      in.frames = stage(in.id, "load", [&] { return read_frame_sequence(config.frames); });
    }
  } else {
    in.saliency = stage(in.id, "load", [&] { return read_frame_sequence(config.saliency); });
  }
  if (in.frames) in.frames->frame_rate = config.frame_rate;
  if (in.saliency) in.saliency->frame_rate = config.frame_rate;
  return in;
}

ScenarioInputs load_scenario_dir(const std::filesystem::path& dir, const PipelineConfig& config) {
  ScenarioInputs in;
  in.id = dir.filename().string();
  if (in.id.find(',') != std::string::npos) fail(ErrorCode::InvalidParameter, "scenario ids may not contain commas");
  if (config.variant == Variant::Of) {
    if (std::filesystem::exists(dir / "flow.fseq")) {
      in.flow = stage(in.id, "load", [&] { return read_flow_sequence(dir / "flow.fseq"); });
    } else {
      in.frames = stage(in.id, "load", [&] { return read_frame_sequence(dir / "frames.fseq"); });
      in.frames->frame_rate = config.frame_rate;
    }
  } else {
    in.saliency = stage(in.id, "load", [&] { return read_frame_sequence(dir / "saliency.fseq"); });
    in.saliency->frame_rate = config.frame_rate;
  }
  return in;
}

void write_scenario_artifacts(const ScenarioResult& r, const PipelineConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (config.variant == Variant::Of) {
    write_text_file(dir / "cellmeans.csv", format_cell_flow_csv(r.flow_means));
  } else {
    write_text_file(dir / "cellmeans.csv", format_cell_saliency_csv(r.saliency_means));
  }
  write_text_file(dir / "features.csv", format_features_csv(r.features, config.variant));
  write_text_file(dir / "morton.csv", format_morton_csv(r.morton));
  std::vector<ScenarioEvent> events;
  for (const auto& e : r.events) events.push_back({r.id, e});
  write_text_file(dir / "events.csv", format_events_csv(events));
  if (r.flow) write_fseq(*r.flow, dir / "flow.fseq");
}

RunSummary run_pipeline(const PipelineConfig& config) {
  config.validate();
  RunSummary summary;
  std::filesystem::create_directories(config.output_dir);

  if (config.scenarios.empty()) {
    summary.scenarios.push_back(process_scenario(load_scenario(config), config));
    write_scenario_artifacts(summary.scenarios.front(), config, config.output_dir);
  } else {
    if (!std::filesystem::is_directory(config.scenarios)) {
      fail(ErrorCode::IoFailure, fmt::format("{} is not a directory", config.scenarios.string()));
    }
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(config.scenarios)) {
      if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::ranges::sort(dirs);

    summary.scenarios.resize(dirs.size());
    std::vector<std::exception_ptr> errors(dirs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < dirs.size(); i = next++) {
        try {
          summary.scenarios[i] = process_scenario(load_scenario_dir(dirs[i], config), config);
          write_scenario_artifacts(summary.scenarios[i], config, config.output_dir / summary.scenarios[i].id);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    {
      const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), std::max<std::size_t>(dirs.size(), 1));
      std::vector<std::jthread> pool;
      for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
      worker();
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::vector<ScenarioEvent> all;
    for (const auto& s : summary.scenarios) {
      for (const auto& e : s.events) all.push_back({s.id, e});
    }
    write_text_file(config.output_dir / "events.csv", format_events_csv(all));
  }

  std::int64_t frames = 0;
  double elapsed = 0.0;
  for (const auto& s : summary.scenarios) {
    frames += s.frame_count;
    elapsed += s.timings.total();
  }
  summary.fps = (frames > 0 && elapsed > 0.0) ? throughput(frames, elapsed) : 0.0;

  if (!config.annotations.empty()) {
    const auto truth_all = read_annotations(config.annotations);
    std::set<std::string> ids;
    PredictedEvents predicted;
    for (const auto& s : summary.scenarios) {
      ids.insert(s.id);
      if (!s.events.empty()) predicted[s.id] = s.events;
    }
    std::vector<GroundTruthEvent> truth;
    for (const auto& t : truth_all) {
      if (ids.contains(t.scenario_id)) truth.push_back(t);
    }
    MetricsReport report = match_and_score(predicted, truth, config.iou_threshold);
    report.fps = summary.fps;
    summary.metrics = report;
    const std::vector<MetricsRow> rows = {{std::string(to_string(config.variant)), report}};
    write_text_file(config.output_dir / "metrics.csv", format_metrics_csv(rows));
  }
  return summary;
}

}  // namespace sfcevent
