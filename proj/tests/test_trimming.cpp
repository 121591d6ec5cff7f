#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "tubelink/fusion.hpp"
#include "tubelink/oracle.hpp"
#include "tubelink/synth.hpp"
#include "tubelink/trimming.hpp"

namespace tubelink {
namespace {

constexpr Label A = Label::action;
constexpr Label B = Label::background;

TrimConfig with_penalty(double lambda_l, double alpha) {
  TrimConfig cfg;
  cfg.lambda_l = lambda_l;
  cfg.alpha_default = alpha;
  return cfg;
}

TEST(TrimPath, UniformForegroundKeepsEverything) {
  const auto p = testing::path_from_scores({0.9, 0.9, 0.9, 0.9});
  EXPECT_EQ(trim_path(p, {}), (Labelling{A, A, A, A}));
}

TEST(TrimPath, PenaltyControlsTheDip) {
  const auto p = testing::path_from_scores({0.9, 0.1, 0.9});
  EXPECT_EQ(trim_path(p, with_penalty(0.0, 1.0)), (Labelling{A, B, A}));
  EXPECT_EQ(trim_path(p, with_penalty(1.0, 10.0)), (Labelling{A, A, A}));
  // Both agree with enumeration.
  EXPECT_EQ(oracle::brute_force_best_labelling(p, with_penalty(0.0, 1.0)).first, (Labelling{A, B, A}));
  EXPECT_EQ(oracle::brute_force_best_labelling(p, with_penalty(1.0, 10.0)).first, (Labelling{A, A, A}));
}

TEST(TrimPath, TiesPreferAction) {
  // fg 0.5 == bg 1 - 0.5 everywhere: every constant labelling ties.
  const auto p = testing::path_from_scores({0.5, 0.5, 0.5});
  EXPECT_EQ(trim_path(p, {}), (Labelling{A, A, A}));
  EXPECT_EQ(oracle::brute_force_best_labelling(p, {}).first, (Labelling{A, A, A}));
  EXPECT_EQ(trim_path(p, with_penalty(0.0, 0.0)), (Labelling{A, A, A}));
}

TEST(TrimPath, EmptyPath) { EXPECT_TRUE(trim_path(ActionPath{}, {}).empty()); }

TEST(TrimPath, BackgroundModes) {
  ActionPath p{"v", 0, {testing::node(1.4, 0.7)}, 0};
  TrimConfig cfg;
  EXPECT_NEAR(background_unary(p.nodes[0], cfg), 0.3, 1e-15);
  cfg.background_mode = BackgroundScoreMode::constant;
  cfg.background_constant = 2.0;
  EXPECT_EQ(background_unary(p.nodes[0], cfg), 2.0);
  EXPECT_EQ(trim_path(p, cfg), Labelling{B});
  cfg.foreground = ForegroundScores::raw;
  EXPECT_EQ(foreground_unary(p.nodes[0], cfg), 0.7);
  // Fused scores above 1 clamp the complement at zero.
  ActionPath q{"v", 0, {testing::node(1.2, 1.2)}, 0};
  EXPECT_EQ(background_unary(q.nodes[0], TrimConfig{}), 0.0);
}

TEST(TrimPath, PerClassAlpha) {
  auto p = testing::path_from_scores({0.9, 0.1, 0.9}, 2);
  TrimConfig cfg = with_penalty(1.0, 0.0);
  EXPECT_EQ(trim_path(p, cfg), (Labelling{A, B, A}));
  cfg.alpha[2] = 10.0;
  EXPECT_EQ(trim_path(p, cfg), (Labelling{A, A, A}));
  cfg.alpha[-1] = 1.0;
  EXPECT_THROW(trim_path(p, cfg), UsageError);
}

TEST(TrimPath, OptimalAgainstEnumeration) {
  Rng rng(31);
  for (int trial = 0; trial < 600; ++trial) {
    const auto p = testing::random_path(rng, rng.integer(1, 12));
    const auto cfg = with_penalty(rng.uniform(0, 3), rng.uniform(0, 3));
    const auto labels = trim_path(p, cfg);
    const auto [oracle_labels, best] = oracle::brute_force_best_labelling(p, cfg);
    ASSERT_NEAR(labelling_objective(p, labels, cfg), best, 1e-9);
  }
}

TEST(TrimPath, ZeroSmoothnessIsPerFrameArgmax) {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = testing::random_path(rng, rng.integer(1, 30));
    const auto labels = trim_path(p, with_penalty(0.0, 5.0));
    const TrimConfig cfg;
    for (std::size_t t = 0; t < p.num_frames(); ++t)
      ASSERT_EQ(labels[t], foreground_unary(p.nodes[t], cfg) >= background_unary(p.nodes[t], cfg) ? A : B);
  }
}

TEST(TrimPath, LargePenaltyGivesConstantLabelling) {
  Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = testing::random_path(rng, rng.integer(1, 30));
    const TrimConfig base;
    double fg = 0, bg = 0, gap = 0;
    for (const auto& n : p.nodes) {
      fg += foreground_unary(n, base);
      bg += background_unary(n, base);
      gap += std::abs(foreground_unary(n, base) - background_unary(n, base));
    }
    const auto labels = trim_path(p, with_penalty(1.0, gap + 0.01));
    ASSERT_EQ(labels, Labelling(p.num_frames(), fg >= bg ? A : B));
  }
}

TEST(CutTubes, RunDecomposition) {
  const auto p = testing::path_from_scores({0.9, 0.8, 0.1, 0.7});
  const auto tubes = cut_tubes(p, {A, A, B, A}, {});
  ASSERT_EQ(tubes.size(), 2u);
  EXPECT_EQ(tubes[0].start_frame, 0u);
  EXPECT_EQ(tubes[0].end_frame(), 1u);
  EXPECT_EQ(tubes[1].start_frame, 3u);
  EXPECT_EQ(tubes[1].end_frame(), 3u);
  EXPECT_NEAR(tubes[0].score, 0.85, 1e-15);
  EXPECT_TRUE(cut_tubes(p, {B, B, B, B}, {}).empty());
  EXPECT_THROW(cut_tubes(p, {A}, {}), DataError);
}

TEST(CutTubes, TopKMean) {
  const auto p = testing::path_from_scores({0.9, 0.5, 0.1});
  TrimConfig cfg;
  cfg.top_k = 2;
  EXPECT_NEAR(cut_tubes(p, {A, A, A}, cfg)[0].score, 0.7, 1e-15);
  cfg.top_k = 40;  // capped at the tube length
  EXPECT_NEAR(cut_tubes(p, {A, A, A}, cfg)[0].score, 0.5, 1e-15);
}

TEST(CutTubes, Invariants) {
  Rng rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = testing::random_path(rng, rng.integer(1, 40));
    TrimConfig cfg;
    cfg.top_k = rng.integer(1, 10);
    const auto tubes = cut_tubes(p, trim_path(p, cfg), cfg);
    std::size_t next_free = 0;
    for (const auto& tube : tubes) {
      ASSERT_GE(tube.start_frame, next_free);
      next_free = tube.end_frame() + 2;  // runs are maximal, so a gap separates them
      std::vector<double> scores;
      for (std::size_t t = tube.start_frame; t <= tube.end_frame(); ++t) {
        ASSERT_EQ(tube.boxes[t - tube.start_frame], p.nodes[t].box);
        scores.push_back(p.nodes[t].score);
      }
      std::reverse(scores.begin(), scores.end());
      ASSERT_DOUBLE_EQ(tube.score, top_k_mean(scores, cfg.top_k));
    }
  }
}

TEST(BuildTubes, UniformForegroundGivesOneFullTube) {
  VideoDetections v{"v", {}};
  for (int t = 0; t < 8; ++t) v.frames.push_back({{{0, 0, 10, 10}, {0.95}, {}}});
  const auto tubes = build_tubes(v, {}, {});
  ASSERT_EQ(tubes.size(), 1u);
  EXPECT_EQ(tubes[0].start_frame, 0u);
  EXPECT_EQ(tubes[0].end_frame(), 7u);
  EXPECT_NEAR(tubes[0].score, 0.95, 1e-15);
}

ScenarioSpec burst_scenario() {
  ScenarioSpec s;
  s.seed = 99;
  s.num_frames = 20;
  s.num_classes = 2;
  PlantSpec p;
  p.class_id = 0;
  p.action_start = 9;  // frames 10..20
  p.action_end = 19;
  p.visible_start = 0;
  p.start_box = {40, 40, 100, 160};
  p.end_box = {80, 40, 140, 160};
  p.ramp = 1;
  s.plants.push_back(p);
  s.clutter.per_frame = 2;
  s.box_noise = 1.0;
  s.score_noise = 0.05;
  return s;
}

TEST(BuildTubes, BurstIsTrimmedToItsExtent) {
  const auto sc = generate(burst_scenario());
  const auto fused = fuse_video(sc.appearance, sc.motion, {});
  const auto paths = extract_paths(fused, 0, {});
  ASSERT_FALSE(paths.empty());
  const auto labels = trim_path(paths[0], {});
  EXPECT_EQ(labels, oracle::brute_force_best_labelling(paths[0], {}).first);

  const auto tubes = build_tubes(fused, {}, {});
  std::vector<ActionTube> first;
  for (const auto& t : tubes)
    if (t.class_id == 0) first.push_back(t);
  ASSERT_GE(first.size(), 1u);
  const auto& t = first[0];
  EXPECT_LE(std::abs(static_cast<long>(t.start_frame) - 9), 2);
  EXPECT_LE(std::abs(static_cast<long>(t.end_frame()) - 19), 2);
}

TEST(BuildTubes, TwoConcurrentInstances) {
  ScenarioSpec s;
  s.seed = 5;
  s.num_frames = 30;
  s.num_classes = 1;
  PlantSpec a;
  a.action_start = 3;
  a.action_end = 25;
  a.start_box = {10, 10, 60, 110};
  a.end_box = {30, 10, 80, 110};
  PlantSpec b = a;
  b.action_start = 6;
  b.action_end = 28;
  b.start_box = {200, 60, 250, 160};
  b.end_box = {180, 60, 230, 160};
  s.plants = {a, b};
  s.clutter.per_frame = 3;
  const auto sc = generate(s);
  const auto tubes = build_tubes(fuse_video(sc.appearance, sc.motion, {}), {}, {});
  ASSERT_GE(tubes.size(), 2u);
  const auto& t0 = tubes[0];
  const auto& t1 = tubes[1];
  const std::size_t lo = std::max(t0.start_frame, t1.start_frame);
  const std::size_t hi = std::min(t0.end_frame(), t1.end_frame());
  ASSERT_LE(lo, hi);
  for (std::size_t t = lo; t <= hi; ++t)
    EXPECT_EQ(iou(t0.boxes[t - t0.start_frame], t1.boxes[t - t1.start_frame]), 0.0);
}

TEST(UntrimmedTubes, SpanWholePaths) {
  const auto p = testing::path_from_scores({0.9, 0.1, 0.5});
  const auto tubes = untrimmed_tubes({p}, {});
  ASSERT_EQ(tubes.size(), 1u);
  EXPECT_EQ(tubes[0].boxes.size(), 3u);
  EXPECT_NEAR(tubes[0].score, 0.5, 1e-15);
}

}  // namespace
}  // namespace tubelink
