#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "sfcevent/error.hpp"
#include "sfcevent/pipeline.hpp"
#include "sfcevent/synth.hpp"

using namespace sfcevent;

namespace {

SyntheticScenario small_crossing(StartSide side = StartSide::Left, double speed = 4.0, std::uint64_t seed = 1) {
  SceneSpec spec;
  spec.width = 104;
  spec.height = 78;
  spec.speed = speed;
  spec.seed = seed;
  spec.start_side = side;
  spec.scenario_id = side == StartSide::Left ? "lr" : "rl";
  spec.frame_count = full_pass_frame_count(spec);
  return generate_scene(spec);
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace

TEST(Pipeline, StagesComposeToTheEndToEndResult) {
  const auto scene = small_crossing();
  PipelineConfig config;
  config.frames = "unused";
  const ScenarioResult whole = process_scenario({"lr", scene.frames, std::nullopt, std::nullopt}, config);

  const RoiGrid grid = make_grid(scene.frames.width, scene.frames.height);
  const FlowSequence flow = compute_flow(scene.frames, config.flow_params);
  ASSERT_EQ(flow.fields.size(), scene.frames.frames.size() - 1);
  const auto means = flow_cell_means(flow, grid);
  EXPECT_EQ(means.front().frame, 1);
  const auto features = of_feature_stream(means, config.of_params);
  ASSERT_EQ(features.size(), scene.frames.frames.size());
  EXPECT_EQ(features.front().frame, 0);
  const MortonStream morton = encode_stream(features, Variant::Of, 8);
  const auto events = detect_stream(morton, config.detect_params, Variant::Of);

  EXPECT_EQ(whole.frame_count, std::int64_t(scene.frames.frames.size()));
  EXPECT_EQ(whole.features, features);
  EXPECT_EQ(whole.morton.records, morton.records);
  EXPECT_EQ(whole.events, events);
  EXPECT_EQ(format_cell_flow_csv(whole.flow_means), format_cell_flow_csv(means));
}

TEST(Pipeline, SyntheticCrossingIsDetected) {
  for (StartSide side : {StartSide::Left, StartSide::Right}) {
    const auto scene = small_crossing(side);
    PipelineConfig config;
    config.frames = "unused";
    const auto r = process_scenario({"s", scene.frames, std::nullopt, std::nullopt}, config);
    ASSERT_EQ(r.events.size(), 1u);
    const double iou = temporal_iou({r.events[0].start_frame, r.events[0].end_frame},
                                    {scene.truth.start_frame, scene.truth.end_frame});
    EXPECT_GE(iou, 0.5);
    EXPECT_EQ(r.events[0].direction, side == StartSide::Left ? Direction::LeftToRight : Direction::RightToLeft);
  }
}

TEST(Pipeline, CnnVariantOnPseudoSaliency) {
  const auto scene = small_crossing(StartSide::Right);
  PipelineConfig config;
  config.variant = Variant::Cnn;
  config.saliency = "unused";
  const auto r = process_scenario({"s", std::nullopt, std::nullopt, scene.saliency}, config);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].direction, Direction::RightToLeft);
  EXPECT_GE(temporal_iou({r.events[0].start_frame, r.events[0].end_frame},
                         {scene.truth.start_frame, scene.truth.end_frame}),
            0.5);
  for (const auto& f : r.features) {
    int nonzero = 0;
    for (double v : f.values) nonzero += v != 0.0;
    ASSERT_LE(nonzero, 1);
  }
}

TEST(Pipeline, MirroredCrossingsGiveEqualWindowsAndOppositeDirections) {
  PipelineConfig config;
  config.frames = "unused";
  for (double speed : {2.0, 3.5, 6.0}) {
    for (std::uint64_t seed : {3u, 4u}) {
      const auto left = process_scenario({"l", small_crossing(StartSide::Left, speed, seed).frames, std::nullopt,
                                          std::nullopt},
                                         config);
      const auto right = process_scenario({"r", small_crossing(StartSide::Right, speed, seed).frames, std::nullopt,
                                           std::nullopt},
                                          config);
      ASSERT_EQ(left.events.size(), 1u);
      ASSERT_EQ(right.events.size(), 1u);
      EXPECT_EQ(left.events[0].length(), right.events[0].length()) << speed << " / " << seed;
      EXPECT_EQ(left.events[0].direction, Direction::LeftToRight);
      EXPECT_EQ(right.events[0].direction, Direction::RightToLeft);
    }
  }
}

TEST(Pipeline, PrecomputedFlowMatchesFrames) {
  const auto scene = small_crossing();
  PipelineConfig config;
  config.frames = "unused";
  const auto from_frames = process_scenario({"s", scene.frames, std::nullopt, std::nullopt}, config);
  const auto from_flow =
      process_scenario({"s", std::nullopt, compute_flow(scene.frames, config.flow_params), std::nullopt}, config);
  EXPECT_EQ(from_flow.frame_count, from_frames.frame_count);
  EXPECT_EQ(from_flow.features, from_frames.features);
  EXPECT_EQ(from_flow.events, from_frames.events);
}

TEST(Pipeline, EmptySequenceYieldsNoEvents) {
  oracle::TempDir dir("empty");
  FrameSequence empty;
  empty.width = 104;
  empty.height = 78;
  write_fseq(empty, dir / "frames.fseq");
  PipelineConfig config;
  config.frames = dir / "frames.fseq";
  config.output_dir = dir / "out";
  const RunSummary s = run_pipeline(config);
  ASSERT_EQ(s.scenarios.size(), 1u);
  EXPECT_TRUE(s.scenarios[0].events.empty());
  EXPECT_TRUE(s.scenarios[0].morton.records.empty());
  const auto morton = parse_morton_csv(slurp(dir / "out" / "morton.csv"));
  EXPECT_TRUE(morton.records.empty());
  EXPECT_TRUE(parse_events_csv(slurp(dir / "out" / "events.csv")).empty());
}

TEST(Pipeline, CnnWithoutSaliencyFailsBeforeProcessing) {
  oracle::TempDir dir("cnn_cfg");
  PipelineConfig config;
  config.variant = Variant::Cnn;
  config.frames = dir / "frames.fseq";
  config.output_dir = dir / "out";
  try {
    run_pipeline(config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "out"));
}

TEST(Pipeline, ErrorsCarryStageContext) {
  FlowSequence bad;
  bad.width = 104;
  bad.height = 78;
  bad.fields.emplace_back(100, 78);  // narrower than declared
  PipelineConfig config;
  config.flow = "unused";
  try {
    process_scenario({"broken", std::nullopt, bad, std::nullopt}, config);
    FAIL();
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("broken"), std::string::npos) << what;
    EXPECT_NE(what.find("stage"), std::string::npos) << what;
  }
}

TEST(Pipeline, RunsAreByteIdenticalAndJobCountInvariant) {
  oracle::TempDir dir("determinism");
  const auto root = dir / "scenarios";
  const std::vector<std::pair<std::string, SyntheticScenario>> scenes = {
      {"a_lr", small_crossing(StartSide::Left, 3.0, 2)},
      {"b_rl", small_crossing(StartSide::Right, 5.0, 3)},
      {"c_static", [] {
         SceneSpec spec;
         spec.width = 104;
         spec.height = 78;
         spec.frame_count = 40;
         spec.motion = MoverMotion::None;
         spec.scenario_id = "c_static";
         return generate_scene(spec);
       }()}};
  std::vector<GroundTruthEvent> truth;
  for (const auto& [id, s] : scenes) {
    std::filesystem::create_directories(root / id);
    write_fseq(s.frames, root / id / "frames.fseq");
    GroundTruthEvent t = s.truth;
    t.scenario_id = id;
    truth.push_back(t);
  }
  write_annotations(truth, dir / "gt.csv");

  auto run = [&](const std::string& out, int jobs) {
    PipelineConfig c;
    c.scenarios = root;
    c.annotations = dir / "gt.csv";
    c.jobs = jobs;
    c.output_dir = dir / out;
    return run_pipeline(c);
  };
  const RunSummary first = run("out1", 1);
  run("out2", 1);
  run("out3", 3);
  ASSERT_EQ(first.scenarios.size(), 3u);
  ASSERT_TRUE(first.metrics.has_value());
  EXPECT_EQ(first.metrics->tp, 2);
  EXPECT_EQ(first.metrics->tn, 1);

  std::vector<std::filesystem::path> files = {"events.csv"};
  for (const auto& [id, s] : scenes)
    for (const char* f : {"cellmeans.csv", "features.csv", "morton.csv", "events.csv"}) files.push_back(id + "/" + f);
  for (const auto& f : files) {
    const auto a = slurp(dir / "out1" / f);
    EXPECT_EQ(a, slurp(dir / "out2" / f)) << f;
    EXPECT_EQ(a, slurp(dir / "out3" / f)) << f;
  }
  // metrics.csv differs only in the wall-clock fps column.
  auto strip_fps = [&](const std::string& out) {
    std::string text = slurp(dir / out / "metrics.csv");
    std::string kept;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) kept += line.substr(0, line.rfind(',')) + "\n";
    return kept;
  };
  EXPECT_EQ(strip_fps("out1"), strip_fps("out2"));
  EXPECT_EQ(strip_fps("out1"), strip_fps("out3"));
}

TEST(Pipeline, LoadScenarioDirPrefersFlow) {
  oracle::TempDir dir("load");
  const auto scene = small_crossing();
  write_fseq(scene.frames, dir / "frames.fseq");
  PipelineConfig config;
  config.frames = "unused";
  auto in = load_scenario_dir(dir.path(), config);
  EXPECT_TRUE(in.frames.has_value());
  EXPECT_FALSE(in.flow.has_value());
  write_fseq(compute_flow(scene.frames, config.flow_params), dir / "flow.fseq");
  in = load_scenario_dir(dir.path(), config);
  EXPECT_TRUE(in.flow.has_value());
  EXPECT_EQ(in.id, dir.path().filename().string());
}
