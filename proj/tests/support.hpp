#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tubelink/data_model.hpp"
#include "tubelink/random.hpp"

namespace tubelink::testing {

inline Box random_box(Rng& rng, double extent = 100.0, double min_size = 2.0, double max_size = 40.0) {
  const double w = rng.uniform(min_size, max_size);
  const double h = rng.uniform(min_size, max_size);
  const double x = rng.uniform(0.0, extent);
  const double y = rng.uniform(0.0, extent);
  return {x, y, x + w, y + h};
}

inline std::vector<double> random_scores(Rng& rng, std::size_t num_classes, double hi = 1.0) {
  std::vector<double> s(num_classes);
  for (auto& v : s) v = rng.uniform(0.0, hi);
  return s;
}

inline DetectionBox random_detection(Rng& rng, std::size_t num_classes, double extent = 100.0) {
  return {random_box(rng, extent), random_scores(rng, num_classes), {}};
}

inline Frame random_frame(Rng& rng, std::size_t count, std::size_t num_classes, double extent = 100.0) {
  Frame f;
  for (std::size_t i = 0; i < count; ++i) f.push_back(random_detection(rng, num_classes, extent));
  return f;
}

// Every frame gets between min_boxes and max_boxes detections.
inline VideoDetections random_video(Rng& rng, std::size_t T, std::size_t min_boxes, std::size_t max_boxes,
                                    std::size_t num_classes, const std::string& id = "v",
                                    double extent = 60.0) {
  VideoDetections v;
  v.video_id = id;
  for (std::size_t t = 0; t < T; ++t)
    v.frames.push_back(random_frame(rng, rng.integer(min_boxes, max_boxes), num_classes, extent));
  return v;
}

inline ActionPath random_path(Rng& rng, std::size_t T, ClassId c = 0) {
  ActionPath p;
  p.video_id = "v";
  p.class_id = c;
  for (std::size_t t = 0; t < T; ++t) {
    const double raw = rng.uniform();
    const double boost = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
    p.nodes.push_back({0, random_box(rng), raw + boost, raw});
  }
  return p;
}

inline PathNode node(double score, double raw, Box box = {0, 0, 10, 10}) { return {0, box, score, raw}; }

inline ActionPath path_from_scores(const std::vector<double>& scores, ClassId c = 0) {
  ActionPath p;
  p.video_id = "v";
  p.class_id = c;
  for (double s : scores) p.nodes.push_back(node(s, s));
  return p;
}

// Small evaluation corpus: ground truth with perturbed copies as predictions, plus
// unrelated distractor tubes.
inline std::pair<std::vector<ActionTube>, std::vector<GroundTruthTube>> random_corpus(Rng& rng) {
  std::vector<ActionTube> preds;
  std::vector<GroundTruthTube> gts;
  const std::size_t videos = rng.integer(1, 4);
  const auto C = static_cast<ClassId>(rng.integer(1, 3));
  for (std::size_t v = 0; v < videos; ++v) {
    const std::string id = "v" + std::to_string(v);
    for (auto k = rng.integer(0, 3); k > 0; --k) {
      GroundTruthTube g{id, static_cast<ClassId>(rng.integer(0, C - 1)), rng.integer(0, 10), {}};
      for (auto n = rng.integer(1, 10); n > 0; --n) g.boxes.push_back(random_box(rng, 10, 10, 20));
      gts.push_back(g);
      // Perturbed copies make true positives likely.
      for (auto m = rng.integer(0, 2); m > 0; --m) {
        ActionTube p{id, rng.uniform() < 0.8 ? g.class_id : static_cast<ClassId>(rng.integer(0, C - 1)),
                     g.start_frame + rng.integer(0, 2), {}, std::round(rng.uniform() * 8) / 8};
        for (std::size_t n = 0; n + (p.start_frame - g.start_frame) < g.boxes.size(); ++n)
          p.boxes.push_back(translated(g.boxes[n + p.start_frame - g.start_frame], rng.uniform(-4, 4), rng.uniform(-4, 4)));
        if (p.boxes.empty()) p.boxes.push_back(g.boxes.back());
        preds.push_back(p);
      }
    }
    for (auto k = rng.integer(0, 2); k > 0; --k) {
      ActionTube p{id, static_cast<ClassId>(rng.integer(0, C - 1)), rng.integer(0, 10), {}, rng.uniform()};
      for (auto n = rng.integer(1, 10); n > 0; --n) p.boxes.push_back(random_box(rng, 10, 10, 20));
      preds.push_back(p);
    }
  }
  return {preds, gts};
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tubelink_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tubelink::testing
