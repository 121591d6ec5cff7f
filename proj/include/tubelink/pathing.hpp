#pragma once

// First linking pass: class-specific paths with one box per frame that
// maximise  E(p) = sum_t s*_c(b_t) + lambda_o * sum_{t>=2} IoU(b_t, b_{t-1}),
// solved exactly by Viterbi. Further instances are found by removing the
// boxes of each extracted path and solving again.

#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/geometry.hpp"

namespace tubelink {

enum class EmptyFramePolicy {
  skip_class,  // a class with an empty frame yields no paths
  stop,        // a class with an empty frame raises EmptyFrameError
};

struct PathConfig {
  double lambda_o = 1.0;
  std::size_t max_paths_per_class = 10;
  EmptyFramePolicy empty_frame_policy = EmptyFramePolicy::skip_class;
  // Boxes whose class score is below the floor do not take part for that
  // class. Scores are non-negative, so the default keeps every box.
  double score_floor = 0.0;
};

inline void validate(const PathConfig& cfg) {
  if (!(cfg.lambda_o >= 0.0) || !std::isfinite(cfg.lambda_o)) throw UsageError("lambda_o must be >= 0");
  if (cfg.max_paths_per_class < 1) throw UsageError("max_paths_per_class must be >= 1");
  if (!std::isfinite(cfg.score_floor)) throw UsageError("score_floor must be finite");
}

inline double path_energy(std::span<const PathNode> nodes, double lambda_o) {
  double unary = 0.0;
  double pairwise = 0.0;
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    unary += nodes[t].score;
    if (t > 0) pairwise += iou(nodes[t].box, nodes[t - 1].box);
  }
  return unary + lambda_o * pairwise;
}

inline double path_energy(const ActionPath& path, double lambda_o) {
  return path_energy(std::span<const PathNode>(path.nodes), lambda_o);
}

// Reusable Viterbi solver for one video. Overlaps between adjacent frames are
// class independent, so they are computed once and shared by every class and
// every extraction round.
class PathLinker {
 public:
  explicit PathLinker(const VideoDetections& video) : video_(video) {
    const auto& frames = video_.frames;
    overlaps_.resize(frames.size());
    for (std::size_t t = 1; t < frames.size(); ++t) {
      const auto& prev = frames[t - 1];
      const auto& cur = frames[t];
      auto& m = overlaps_[t];
      m.resize(prev.size() * cur.size());
      for (std::size_t i = 0; i < prev.size(); ++i)
        for (std::size_t j = 0; j < cur.size(); ++j) m[i * cur.size() + j] = iou(prev[i].box, cur[j].box);
    }
  }

  const VideoDetections& video() const noexcept { return video_; }

  // Box indices per frame taking part for class c.
  std::vector<std::vector<std::size_t>> candidates(ClassId c, const PathConfig& cfg) const {
    if (c < 0) throw DataError("negative class id");
    std::vector<std::vector<std::size_t>> pool(video_.frames.size());
    for (std::size_t t = 0; t < pool.size(); ++t) {
      const auto& frame = video_.frames[t];
      for (std::size_t i = 0; i < frame.size(); ++i) {
        if (static_cast<std::size_t>(c) >= frame[i].scores.size())
          throw DataError("class " + std::to_string(c) + " is out of range for video '" + video_.video_id + "'");
        if (frame[i].score(c) >= cfg.score_floor) pool[t].push_back(i);
      }
    }
    return pool;
  }

  // Optimal path over `pool`. Ties prefer the lower box index, both for
  // predecessors and for the final frame.
  ActionPath best_path(ClassId c, const std::vector<std::vector<std::size_t>>& pool, double lambda_o) const {
    const std::size_t T = video_.frames.size();
    if (pool.size() != T) throw DataError("candidate pool does not match the video length");
    for (std::size_t t = 0; t < T; ++t)
      if (pool[t].empty())
        throw EmptyFrameError("frame " + std::to_string(t + 1) + " of video '" + video_.video_id +
                              "' has no candidate boxes for class " + std::to_string(c));

    std::vector<std::vector<double>> cum(T);
    std::vector<std::vector<std::size_t>> back(T);
    cum[0].resize(pool[0].size());
    for (std::size_t k = 0; k < pool[0].size(); ++k) cum[0][k] = video_.frames[0][pool[0][k]].score(c);

    for (std::size_t t = 1; t < T; ++t) {
      const auto& prev = pool[t - 1];
      const auto& cur = pool[t];
      const std::size_t width = video_.frames[t].size();
      const auto& m = overlaps_[t];
      cum[t].resize(cur.size());
      back[t].resize(cur.size());
      for (std::size_t k = 0; k < cur.size(); ++k) {
        const std::size_t j = cur[k];
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t q = 0; q < prev.size(); ++q) {
          const double e = cum[t - 1][q] + lambda_o * m[prev[q] * width + j];
          if (e > best) {
            best = e;
            arg = q;
          }
        }
        cum[t][k] = best + video_.frames[t][j].score(c);
        back[t][k] = arg;
      }
    }

    std::size_t k = 0;
    for (std::size_t q = 1; q < cum[T - 1].size(); ++q)
      if (cum[T - 1][q] > cum[T - 1][k]) k = q;

    ActionPath path;
    path.video_id = video_.video_id;
    path.class_id = c;
    path.nodes.resize(T);
    for (std::size_t t = T; t-- > 0;) {
      const std::size_t i = pool[t][k];
      const auto& det = video_.frames[t][i];
      path.nodes[t] = PathNode{i, det.box, det.score(c), det.raw_score(c)};
      if (t > 0) k = back[t][k];
    }
    path.energy = path_energy(path, lambda_o);
    return path;
  }

  // Greedy multi-instance extraction: solve, remove the path's boxes, repeat
  // until a frame runs out of boxes or the per-class cap is reached.
  std::vector<ActionPath> extract_paths(ClassId c, const PathConfig& cfg) const {
    validate(cfg);
    auto pool = candidates(c, cfg);
    std::vector<ActionPath> paths;
    for (std::size_t t = 0; t < pool.size(); ++t) {
      if (!pool[t].empty()) continue;
      if (cfg.empty_frame_policy == EmptyFramePolicy::stop)
        throw EmptyFrameError("frame " + std::to_string(t + 1) + " of video '" + video_.video_id +
                              "' has no candidate boxes for class " + std::to_string(c));
      return paths;
    }
    while (paths.size() < cfg.max_paths_per_class) {
      paths.push_back(best_path(c, pool, cfg.lambda_o));
      bool exhausted = false;
      for (std::size_t t = 0; t < pool.size(); ++t) {
        auto& frame = pool[t];
        std::erase(frame, paths.back().nodes[t].box_index);
        exhausted = exhausted || frame.empty();
      }
      if (exhausted) break;
    }
    return paths;
  }

 private:
  const VideoDetections& video_;
  std::vector<std::vector<double>> overlaps_;  // [t] is |frame t-1| x |frame t|, row-major
};

inline ActionPath best_path(const VideoDetections& video, ClassId c, const PathConfig& cfg) {
  validate(cfg);
  PathLinker linker(video);
  return linker.best_path(c, linker.candidates(c, cfg), cfg.lambda_o);
}

inline std::vector<ActionPath> extract_paths(const VideoDetections& video, ClassId c, const PathConfig& cfg) {
  return PathLinker(video).extract_paths(c, cfg);
}

// Paths for every class of the video, ordered by class then extraction round.
inline std::vector<ActionPath> link_video(const VideoDetections& video, const PathConfig& cfg) {
  PathLinker linker(video);
  std::vector<ActionPath> out;
  const auto C = static_cast<ClassId>(video.num_classes());
  for (ClassId c = 0; c < C; ++c) {
    auto paths = linker.extract_paths(c, cfg);
    out.insert(out.end(), std::make_move_iterator(paths.begin()), std::make_move_iterator(paths.end()));
  }
  return out;
}

}  // namespace tubelink
