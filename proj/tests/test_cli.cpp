#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tubelink/cli.hpp"

namespace tubelink {
namespace {

namespace fs = std::filesystem;

const fs::path kGolden = fs::path(TUBELINK_SOURCE_DIR) / "tests" / "data" / "golden";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "tubelink");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> golden_pipeline(const fs::path& out) {
  return {"pipeline",   "--config", (kGolden / "pipeline.json").string(), "--appearance",
          (kGolden / "appearance.jsonl").string(), "--motion", (kGolden / "motion.jsonl").string(),
          "--out",      out.string()};
}

TEST(Cli, SchemaIsJson) {
  const auto r = run({"--schema"});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["$defs"].contains("detections"));
  EXPECT_TRUE(j["$defs"].contains("tube"));
}

TEST(Cli, HelpAndMissingSubcommand) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, cli::kUsage);
}

TEST(Cli, UnknownFlagWritesNothing) {
  const auto dir = testing::scratch_dir("cli_unknown");
  auto args = golden_pipeline(dir / "tubes.jsonl");
  args.push_back("--no-such-flag");
  const auto r = run(args);
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_TRUE(fs::is_empty(dir));
  EXPECT_EQ(nlohmann::json::parse(r.err)["kind"], "usage");
}

TEST(Cli, PipelineMatchesGoldenOutput) {
  const auto dir = testing::scratch_dir("cli_golden");
  const auto r = run(golden_pipeline(dir / "tubes.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "tubes.jsonl"), slurp(kGolden / "tubes.jsonl"));
  EXPECT_TRUE(r.out.empty());  // diagnostics only on the error stream
}

TEST(Cli, OutputIndependentOfWorkerCount) {
  const auto dir = testing::scratch_dir("cli_workers");
  std::string first;
  for (const char* w : {"1", "4", "8"}) {
    auto args = golden_pipeline(dir / (std::string("tubes_") + w + ".jsonl"));
    args.insert(args.end(), {"--workers", w});
    ASSERT_EQ(run(args).code, 0);
    const auto bytes = slurp(dir / (std::string("tubes_") + w + ".jsonl"));
    if (first.empty()) first = bytes;
    EXPECT_EQ(bytes, first);
  }
}

TEST(Cli, StagesComposeToPipeline) {
  const auto dir = testing::scratch_dir("cli_stages");
  const auto cfg = (kGolden / "pipeline.json").string();
  ASSERT_EQ(run({"fuse", "--config", cfg, "--appearance", (kGolden / "appearance.jsonl").string(), "--motion",
                 (kGolden / "motion.jsonl").string(), "--out", (dir / "fused.jsonl").string()})
                .code,
            0);
  ASSERT_EQ(run({"link", "--config", cfg, "--in", (dir / "fused.jsonl").string(), "--out",
                 (dir / "paths.jsonl").string()})
                .code,
            0);
  ASSERT_EQ(run({"trim", "--config", cfg, "--in", (dir / "paths.jsonl").string(), "--out",
                 (dir / "tubes.jsonl").string()})
                .code,
            0);
  EXPECT_EQ(slurp(dir / "tubes.jsonl"), slurp(kGolden / "tubes.jsonl"));

  ASSERT_EQ(run({"trim", "--in", (dir / "paths.jsonl").string(), "--one-pass", "--out",
                 (dir / "untrimmed.jsonl").string()})
                .code,
            0);
  const auto paths = load_paths(dir / "paths.jsonl");
  const auto untrimmed = load_tubes(dir / "untrimmed.jsonl");
  ASSERT_EQ(untrimmed.size(), paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    EXPECT_EQ(untrimmed[i].boxes.size(), paths[i].num_frames());
    EXPECT_NEAR(paths[i].energy, path_energy(paths[i], 1.0), 1e-9);
  }
}

TEST(Cli, EvalOnExactPredictions) {
  const auto dir = testing::scratch_dir("cli_eval");
  std::vector<ActionTube> tubes;
  for (const auto& g : load_ground_truth(kGolden / "gt.jsonl")) tubes.push_back({g.video_id, g.class_id, g.start_frame, g.boxes, 0.5});
  save_tubes(dir / "exact.jsonl", tubes);
  const auto r = run({"eval", "--tubes", (dir / "exact.jsonl").string(), "--gt", (kGolden / "gt.jsonl").string(),
                      "--deltas", "0.2", "--report", (dir / "report.json").string(), "--pr-dump",
                      (dir / "pr.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["deltas"], nlohmann::json::array({0.2}));
  EXPECT_EQ(report["map"][0], 1.0);
  EXPECT_NE(r.out.find("mAP"), std::string::npos);
  std::istringstream pr(slurp(dir / "pr.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(pr, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["delta"], 0.2);
    ++lines;
  }
  EXPECT_EQ(lines, static_cast<int>(report["classes"].size()));
}

TEST(Cli, PipelineWithGroundTruthReports) {
  const auto dir = testing::scratch_dir("cli_pipe_eval");
  auto args = golden_pipeline(dir / "tubes.jsonl");
  args.insert(args.end(), {"--gt", (kGolden / "gt.jsonl").string(), "--report", (dir / "r.json").string()});
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("AP run"), std::string::npos);  // class names from the config
  EXPECT_TRUE(fs::exists(dir / "r.json"));
}

TEST(Cli, FlagsOverrideConfig) {
  const auto dir = testing::scratch_dir("cli_override");
  std::ofstream(dir / "cfg.json") << R"({"schema_version":1,"fusion":{"tau":1.0}})";
  const auto app = (kGolden / "appearance.jsonl").string();
  const auto mot = (kGolden / "motion.jsonl").string();
  ASSERT_EQ(run({"fuse", "--config", (dir / "cfg.json").string(), "--appearance", app, "--motion", mot, "--out",
                 (dir / "identity.jsonl").string()})
                .code,
            0);
  EXPECT_EQ(load_detections(dir / "identity.jsonl"), load_detections(app));
  ASSERT_EQ(run({"fuse", "--config", (dir / "cfg.json").string(), "--tau", "0.3", "--appearance", app, "--motion",
                 mot, "--out", (dir / "boosted.jsonl").string()})
                .code,
            0);
  EXPECT_NE(load_detections(dir / "boosted.jsonl"), load_detections(app));
}

TEST(Cli, ConfigErrors) {
  const auto dir = testing::scratch_dir("cli_config");
  std::ofstream(dir / "typo.json") << R"({"schema_version":1,"fusion":{"taux":0.3}})";
  std::ofstream(dir / "future.json") << R"({"schema_version":2})";
  std::ofstream(dir / "broken.json") << R"({"schema_version":)";
  for (const char* name : {"typo.json", "future.json", "broken.json"})
    EXPECT_EQ(run({"eval", "--config", (dir / name).string()}).code, cli::kUsage) << name;
  EXPECT_EQ(run({"eval", "--config", (dir / "missing.json").string()}).code, cli::kIo);
}

TEST(Cli, ExitCodes) {
  const auto dir = testing::scratch_dir("cli_codes");
  std::ofstream(dir / "bad.jsonl") << R"({"video_id":"x","num_frames":1,"frames":[{"frame_index":1,"detections":[{"box":[0,0,0,0],"scores":[1]}]}]})"
                                   << '\n';
  const auto out = (dir / "out.jsonl").string();
  EXPECT_EQ(run({"link", "--in", (dir / "bad.jsonl").string(), "--out", out}).code, cli::kData);
  EXPECT_EQ(run({"link", "--in", (dir / "nope.jsonl").string(), "--out", out}).code, cli::kIo);
  EXPECT_EQ(run({"link", "--out", out}).code, cli::kUsage);
  EXPECT_EQ(run({"link", "--in", (kGolden / "appearance.jsonl").string(), "--lambda-o", "-1", "--out", out}).code,
            cli::kUsage);
  EXPECT_EQ(run({"fuse", "--appearance", (kGolden / "appearance.jsonl").string(), "--motion",
                 (kGolden / "gt.jsonl").string(), "--out", out})
                .code,
            cli::kData);
  EXPECT_EQ(run({"link", "--in", (kGolden / "appearance.jsonl").string(), "--out",
                 (dir / "no_dir" / "out.jsonl").string()})
                .code,
            cli::kIo);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, ClassCountFromCatalog) {
  const auto dir = testing::scratch_dir("cli_catalog");
  const auto r = run({"link", "--classes", "a,b", "--in", (kGolden / "appearance.jsonl").string(), "--out",
                      (dir / "p.jsonl").string()});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("expected 2"), std::string::npos);
}

TEST(Cli, AlphaOverrides) {
  const auto dir = testing::scratch_dir("cli_alpha");
  const auto fused = dir / "fused.jsonl";
  ASSERT_EQ(run({"fuse", "--appearance", (kGolden / "appearance.jsonl").string(), "--motion",
                 (kGolden / "motion.jsonl").string(), "--out", fused.string()})
                .code,
            0);
  ASSERT_EQ(run({"link", "--in", fused.string(), "--out", (dir / "p.jsonl").string()}).code, 0);
  const auto in = (dir / "p.jsonl").string();
  EXPECT_EQ(run({"trim", "--in", in, "--classes", "run,jump,wave", "--alpha", "jump=0.5", "--alpha", "2=3",
                 "--out", (dir / "t.jsonl").string()})
                .code,
            0);
  EXPECT_EQ(run({"trim", "--in", in, "--alpha", "jump=0.5", "--out", (dir / "t.jsonl").string()}).code, cli::kUsage);
  EXPECT_EQ(run({"trim", "--in", in, "--alpha", "1=x", "--out", (dir / "t.jsonl").string()}).code, cli::kUsage);
  EXPECT_EQ(run({"trim", "--in", in, "--classes", "a,b", "--alpha", "5=1", "--out", (dir / "t.jsonl").string()}).code,
            cli::kUsage);
}

TEST(Cli, WorkersFromEnvironment) {
  const auto dir = testing::scratch_dir("cli_env");
  ::setenv(kWorkersEnv, "zero", 1);
  EXPECT_EQ(run(golden_pipeline(dir / "t.jsonl")).code, cli::kUsage);
  ::setenv(kWorkersEnv, "3", 1);
  EXPECT_EQ(default_workers(), 3u);
  EXPECT_EQ(run(golden_pipeline(dir / "t.jsonl")).code, 0);
  ::unsetenv(kWorkersEnv);
  EXPECT_EQ(slurp(dir / "t.jsonl"), slurp(kGolden / "tubes.jsonl"));
}

TEST(Cli, SynthWritesThreeFiles) {
  const auto dir = testing::scratch_dir("cli_synth");
  const auto prefix = (dir / "s_").string();
  ASSERT_EQ(run({"synth", "--spec", (kGolden / "scenario.json").string(), "--out-prefix", prefix}).code, 0);
  for (const char* f : {"appearance.jsonl", "motion.jsonl", "gt.jsonl"})
    EXPECT_EQ(slurp(prefix + f), slurp(kGolden / f)) << f;
}

}  // namespace
}  // namespace tubelink
