#pragma once

// Exhaustive reference solvers for both linking objectives. They enumerate
// every candidate and evaluate the objective directly, sharing nothing with
// the dynamic programs beyond the box overlap primitive and the unary
// definitions.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/geometry.hpp"
#include "tubelink/trimming.hpp"

namespace tubelink::oracle {

inline constexpr double kMaxPathEnumeration = 1e6;
inline constexpr std::size_t kMaxLabellingFrames = 20;

// Every box-per-frame selection, in odometer order with frame 0 most
// significant; the first maximum found is kept.
inline std::pair<ActionPath, double> brute_force_best_path(const VideoDetections& video, ClassId c,
                                                           double lambda_o) {
  const std::size_t T = video.num_frames();
  double count = 1.0;
  for (const auto& f : video.frames) {
    if (f.empty()) throw EmptyFrameError("cannot enumerate paths through an empty frame");
    count *= static_cast<double>(f.size());
  }
  if (count > kMaxPathEnumeration) throw DataError("instance too large for exhaustive path enumeration");

  std::vector<std::size_t> pick(T, 0);
  std::vector<std::size_t> best_pick;
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    double energy = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& d = video.frames[t][pick[t]];
      energy += d.scores.at(static_cast<std::size_t>(c));
      if (t > 0) energy += lambda_o * iou(d.box, video.frames[t - 1][pick[t - 1]].box);
    }
    if (energy > best) {
      best = energy;
      best_pick = pick;
    }
    std::size_t t = T;
    while (t > 0 && ++pick[t - 1] == video.frames[t - 1].size()) {
      pick[t - 1] = 0;
      --t;
    }
    if (t == 0) break;
  }

  ActionPath path;
  path.video_id = video.video_id;
  path.class_id = c;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& d = video.frames[t][best_pick[t]];
    path.nodes.push_back({best_pick[t], d.box, d.score(c), d.raw_score(c)});
  }
  path.energy = best;
  return {std::move(path), best};
}

// All 2^T labellings in lexicographic order with action before background,
// so ties resolve to action at the first differing frame.
inline std::pair<Labelling, double> brute_force_best_labelling(const ActionPath& path, const TrimConfig& cfg) {
  const std::size_t T = path.nodes.size();
  if (T > kMaxLabellingFrames) throw DataError("path too long for exhaustive labelling enumeration");
  const double penalty = cfg.lambda_l * cfg.alpha_for(path.class_id);

  Labelling best_labels;
  double best = -std::numeric_limits<double>::infinity();
  Labelling labels(T);
  const std::size_t total = std::size_t{1} << T;
  for (std::size_t code = 0; code < total; ++code) {
    // Bit (T-1-t) set means background at frame t.
    for (std::size_t t = 0; t < T; ++t)
      labels[t] = (code >> (T - 1 - t)) & 1u ? Label::background : Label::action;
    double value = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      value += labels[t] == Label::action ? foreground_unary(path.nodes[t], cfg) : background_unary(path.nodes[t], cfg);
      if (t > 0 && labels[t] != labels[t - 1]) value -= penalty;
    }
    if (value > best) {
      best = value;
      best_labels = labels;
    }
  }
  return {std::move(best_labels), best};
}

}  // namespace tubelink::oracle
