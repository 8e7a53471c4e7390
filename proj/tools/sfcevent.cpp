// sfcevent command-line front end.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sfcevent/config.hpp"
#include "sfcevent/error.hpp"
#include "sfcevent/pipeline.hpp"
#include "sfcevent/stripes.hpp"
#include "sfcevent/synth.hpp"

namespace fs = std::filesystem;
using namespace sfcevent;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInput = 2, kInternal = 3 };

// Options shared by every subcommand. Explicit flags are applied after
// --set overrides, which are applied after the config file.
struct Common {
  std::optional<fs::path> config_file;
  std::vector<std::string> sets;
  ConfigOverrides flags;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "INI-style config file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override a config key (section.key=value)");
  }

  // Registers a flag that mirrors a config key.
  void mirror(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { flags.emplace_back(key, v); }, help);
  }

  PipelineConfig load() const {
    ConfigOverrides all;
    for (const auto& s : sets) all.push_back(parse_override(s));
    all.insert(all.end(), flags.begin(), flags.end());
    return load_config(config_file, all);
  }
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParameter:
      return kConfig;
    default:
      return kInput;
  }
}

std::vector<CellFeatureVector> features_from_inputs(const PipelineConfig& config, Variant variant) {
  const ScenarioInputs in = load_scenario(config);
  if (variant == Variant::Of) {
    const FlowSequence flow = in.flow ? *in.flow : compute_flow(*in.frames, config.flow_params);
    const RoiGrid grid = make_grid(flow.width, flow.height, config.roi, config.gap);
    return of_feature_stream(flow_cell_means(flow, grid), config.of_params);
  }
  const RoiGrid grid = make_grid(in.saliency->width, in.saliency->height, config.roi, config.gap);
  return saliency_features(saliency_cell_means(*in.saliency, grid), config.saliency_params);
}

fs::path output_file(const std::optional<fs::path>& explicit_out, const PipelineConfig& config, const char* name) {
  if (explicit_out) {
    if (explicit_out->has_parent_path()) fs::create_directories(explicit_out->parent_path());
    return *explicit_out;
  }
  fs::create_directories(config.output_dir);
  return config.output_dir / name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic-event retrieval from driving video via space-filling-curve codes"};
  app.require_subcommand(1);
  Common common;
  std::optional<fs::path> out;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    common.attach(sub);
    return sub;
  };

  // convert
  fs::path pgm_dir;
  double frame_rate = 10.0;
  CLI::App* convert = add("convert", "Pack a directory of frame_NNNNNN.pgm files into an FSEQ file");
  convert->add_option("pgm_dir", pgm_dir, "Directory of PGM frames")->required()->check(CLI::ExistingDirectory);
  convert->add_option("-o,--out", out, "Output FSEQ path")->required();
  convert->add_option("--frame-rate", frame_rate, "Frame rate stored in the header");

  // flow
  CLI::App* flow = add("flow", "Dense optical flow between consecutive frames");
  common.mirror(flow, "--frames", "input.frames", "Grayscale FSEQ input");
  flow->add_option("-o,--out", out, "Output flow FSEQ (default <output.dir>/flow.fseq)");

  // of-features
  CLI::App* of_features_cmd = add("of-features", "Angle-difference cell features from frames or flow");
  common.mirror(of_features_cmd, "--frames", "input.frames", "Grayscale FSEQ input");
  common.mirror(of_features_cmd, "--flow", "input.flow", "Precomputed flow FSEQ input");
  of_features_cmd->add_option("-o,--out", out, "Output features CSV (default <output.dir>/features.csv)");

  // cnn-features
  CLI::App* cnn_features_cmd = add("cnn-features", "Saliency cell features");
  common.mirror(cnn_features_cmd, "--saliency", "input.saliency", "Saliency FSEQ input");
  cnn_features_cmd->add_option("-o,--out", out, "Output features CSV (default <output.dir>/features.csv)");

  // encode
  fs::path features_path;
  CLI::App* encode = add("encode", "Quantize features and encode them as Morton codes");
  encode->add_option("--features", features_path, "Features CSV")->required()->check(CLI::ExistingFile);
  common.mirror(encode, "--bits", "quantizer.bits", "Bits per dimension");
  encode->add_option("-o,--out", out, "Output Morton CSV (default <output.dir>/morton.csv)");

  // detect
  fs::path morton_path;
  CLI::App* detect = add("detect", "Detect crossing events in a Morton code stream");
  detect->add_option("--morton", morton_path, "Morton CSV")->required()->check(CLI::ExistingFile);
  common.mirror(detect, "--scenario-id", "input.scenario_id", "Scenario id written to the events");
  common.mirror(detect, "--variant", "pipeline.variant", "of | cnn");
  detect->add_option("-o,--out", out, "Output events CSV (default <output.dir>/events.csv)");

  // eval
  fs::path events_path;
  std::optional<double> eval_fps;
  CLI::App* eval = add("eval", "Score predicted events against annotations");
  eval->add_option("--events", events_path, "Events CSV")->required()->check(CLI::ExistingFile);
  common.mirror(eval, "--annotations", "input.annotations", "Annotations CSV");
  common.mirror(eval, "--iou", "pipeline.iou_threshold", "IoU gate for a true positive");
  common.mirror(eval, "--variant", "pipeline.variant", "of | cnn (metrics row label)");
  eval->add_option("--fps", eval_fps, "Throughput to record in the report");
  eval->add_option("-o,--out", out, "Output metrics CSV (default <output.dir>/metrics.csv)");

  // stripes
  std::string stripe_format = "svg";
  bool overlay = false;
  bool no_timestamp = false;
  CLI::App* stripes = add("stripes", "Render a Morton code stream as a stripe plot");
  stripes->add_option("--morton", morton_path, "Morton CSV")->required()->check(CLI::ExistingFile);
  stripes->add_option("--format", stripe_format, "svg | csv")->check(CLI::IsMember({"svg", "csv"}));
  stripes->add_flag("--overlay", overlay, "Add dominant-cell dots");
  stripes->add_flag("--no-timestamp", no_timestamp, "Omit the SVG generation-time comment");
  stripes->add_option("-o,--out", out, "Output plot (default <output.dir>/stripes.<format>)");

  // run
  bool log = false;
  CLI::App* run = add("run", "Run the whole pipeline and write every artifact");
  common.mirror(run, "--frames", "input.frames", "Grayscale FSEQ input");
  common.mirror(run, "--saliency", "input.saliency", "Saliency FSEQ input");
  common.mirror(run, "--flow", "input.flow", "Precomputed flow FSEQ input");
  common.mirror(run, "--annotations", "input.annotations", "Annotations CSV");
  common.mirror(run, "--scenarios", "input.scenarios", "Directory of scenario subdirectories");
  common.mirror(run, "--scenario-id", "input.scenario_id", "Scenario id for single-input runs");
  common.mirror(run, "--variant", "pipeline.variant", "of | cnn");
  common.mirror(run, "--jobs", "pipeline.jobs", "Scenarios processed concurrently");
  common.mirror(run, "--out-dir", "output.dir", "Output directory");
  run->add_flag("--log", log, "Per-stage timing lines on stderr");

  // synth
  SceneSpec scene;
  scene.width = 104;
  scene.height = 78;
  scene.speed = 4.0;
  int synth_frames = 0;
  std::string side = "left";
  std::string motion = "horizontal";
  fs::path synth_dir;
  std::optional<std::string> synth_id;
  CLI::App* synth = add("synth", "Generate a synthetic crossing scenario with ground truth");
  synth->add_option("-o,--out-dir", synth_dir, "Scenario directory to create")->required();
  synth->add_option("--width", scene.width, "Frame width");
  synth->add_option("--height", scene.height, "Frame height");
  synth->add_option("--frames", synth_frames, "Frame count (default: until the mover has left the image)");
  synth->add_option("--side", side, "left | right")->check(CLI::IsMember({"left", "right"}));
  synth->add_option("--motion", motion, "horizontal | vertical | none")
      ->check(CLI::IsMember({"horizontal", "vertical", "none"}));
  synth->add_option("--speed", scene.speed, "Mover speed in px per frame");
  synth->add_option("--seed", scene.seed, "Texture seed");
  synth->add_option("--scenario-id", synth_id, "Scenario id (default: directory name)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*convert) {
      FrameSequence seq = read_pgm_sequence(pgm_dir);
      seq.frame_rate = frame_rate;
      write_fseq(seq, output_file(out, PipelineConfig{}, "frames.fseq"));
    } else if (*flow) {
      const PipelineConfig config = common.load();
      config.flow_params.validate();
      if (config.frames.empty()) fail(ErrorCode::ConfigError, "flow requires input.frames");
      const FlowSequence result = compute_flow(read_frame_sequence(config.frames), config.flow_params);
      write_fseq(result, output_file(out, config, "flow.fseq"));
    } else if (*of_features_cmd || *cnn_features_cmd) {
      PipelineConfig config = common.load();
      config.variant = *of_features_cmd ? Variant::Of : Variant::Cnn;
      config.validate();
      const auto rows = features_from_inputs(config, config.variant);
      write_text_file(output_file(out, config, "features.csv"), format_features_csv(rows, config.variant));
    } else if (*encode) {
      const PipelineConfig config = common.load();
      const std::string text = read_text_file(features_path);
      const auto rows = parse_features_csv(text);
      const Variant variant = text.starts_with("# variant=") ? parse_variant(text.substr(10, text.find('\n') - 10))
                                                            : config.variant;
      const MortonStream stream = encode_stream(rows, variant, config.quantizer_bits);
      write_text_file(output_file(out, config, "morton.csv"), format_morton_csv(stream));
    } else if (*detect) {
      const PipelineConfig config = common.load();
      config.detect_params.validate();
      const MortonStream stream = parse_morton_csv(read_text_file(morton_path));
      std::vector<ScenarioEvent> events;
      for (const auto& e : detect_stream(stream, config.detect_params, config.variant)) {
        events.push_back({config.scenario_id, e});
      }
      write_text_file(output_file(out, config, "events.csv"), format_events_csv(events));
    } else if (*eval) {
      const PipelineConfig config = common.load();
      if (config.annotations.empty()) fail(ErrorCode::ConfigError, "eval requires input.annotations");
      const auto events = parse_events_csv(read_text_file(events_path));
      const auto truth = read_annotations(config.annotations);
      MetricsReport report = match_and_score(group_by_scenario(events), truth, config.iou_threshold);
      if (eval_fps) report.fps = *eval_fps;
      const std::vector<MetricsRow> rows = {{std::string(to_string(config.variant)), report}};
      write_text_file(output_file(out, config, "metrics.csv"), format_metrics_csv(rows));
    } else if (*stripes) {
      const PipelineConfig config = common.load();
      StripeOptions options;
      options.format = stripe_format == "csv" ? StripeFormat::Csv : StripeFormat::Svg;
      options.overlay = overlay;
      options.timestamp = !no_timestamp;
      const std::string name = "stripes." + stripe_format;
      emit_stripes(morton_path, output_file(out, config, name.c_str()), options);
    } else if (*run) {
      PipelineConfig config = common.load();
      config.log = log;
      const RunSummary summary = run_pipeline(config);
      std::size_t events = 0;
      for (const auto& s : summary.scenarios) events += s.events.size();
      fmt::print("{} scenario(s), {} event(s), {:.2f} FPS\n", summary.scenarios.size(), events, summary.fps);
      if (summary.metrics) {
        const auto& m = *summary.metrics;
        fmt::print("tp={} fp={} tn={} fn={} f1={:.4f} sensitivity={:.4f} specificity={:.4f} mean_iou={:.4f}\n", m.tp,
                   m.fp, m.tn, m.fn, m.f1, m.sensitivity, m.specificity, m.mean_iou);
      }
    } else if (*synth) {
      const PipelineConfig config = common.load();
      scene.start_side = side == "right" ? StartSide::Right : StartSide::Left;
      scene.motion = motion == "vertical" ? MoverMotion::Vertical
                     : motion == "none"   ? MoverMotion::None
                                          : MoverMotion::Horizontal;
      scene.roi = config.roi;
      scene.gap = config.gap;
      scene.frame_count = synth_frames > 0 ? synth_frames : full_pass_frame_count(scene);
      scene.scenario_id = synth_id ? *synth_id : fs::absolute(synth_dir).lexically_normal().filename().string();
      const SyntheticScenario result = generate_scene(scene);
      fs::create_directories(synth_dir);
      write_fseq(result.frames, synth_dir / "frames.fseq");
      write_fseq(result.saliency, synth_dir / "saliency.fseq");
      const std::vector<GroundTruthEvent> truth = {result.truth};
      write_annotations(truth, synth_dir / "annotations.csv");
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kInternal;
  }
  return kOk;
}
