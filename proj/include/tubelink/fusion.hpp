#pragma once

#include <cstddef>
#include <vector>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/geometry.hpp"

namespace tubelink {

struct FusionConfig {
  double tau = 0.3;  // boost only when the best motion IoU is strictly above this
};

inline void validate(const FusionConfig& cfg) {
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) throw UsageError("tau must lie in [0, 1]");
}

// Boosts each appearance box's class scores with the best-overlapping motion
// box: s*_c = s_c + s_c(motion) * IoU when IoU > tau. The motion box is chosen
// per class by IoU, then higher class score, then lower index. Boosted boxes
// keep their pre-fusion scores in `raw_scores`; untouched boxes compare equal
// to their input.
inline Frame fuse_frame(const Frame& appearance, const Frame& motion, const FusionConfig& cfg) {
  validate(cfg);
  Frame out = appearance;
  if (appearance.empty()) return out;
  const std::size_t C = appearance.front().scores.size();
  for (const auto& a : appearance)
    if (a.scores.size() != C) throw ScoreLengthError("appearance class counts differ within a frame");
  for (const auto& m : motion)
    if (m.scores.size() != C) throw ScoreLengthError("motion and appearance class counts differ");

  std::vector<double> overlaps(motion.size());
  for (auto& det : out) {
    if (motion.empty()) continue;
    for (std::size_t j = 0; j < motion.size(); ++j) overlaps[j] = iou(det.box, motion[j].box);
    for (std::size_t c = 0; c < C; ++c) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < motion.size(); ++j) {
        if (overlaps[j] > overlaps[best] ||
            (overlaps[j] == overlaps[best] && motion[j].scores[c] > motion[best].scores[c]))
          best = j;
      }
      if (overlaps[best] > cfg.tau) {
        if (det.raw_scores.empty()) det.raw_scores = det.scores;
        det.scores[c] += motion[best].scores[c] * overlaps[best];
      }
    }
  }
  return out;
}

inline VideoDetections fuse_video(const VideoDetections& appearance, const VideoDetections& motion,
                                  const FusionConfig& cfg) {
  if (appearance.video_id != motion.video_id)
    throw DataError("video id mismatch: '" + appearance.video_id + "' vs '" + motion.video_id + "'");
  if (appearance.num_frames() != motion.num_frames())
    throw DataError("frame count mismatch for video '" + appearance.video_id + "'");
  const std::size_t ca = appearance.num_classes();
  const std::size_t cm = motion.num_classes();
  if (ca != 0 && cm != 0 && ca != cm)
    throw ScoreLengthError("class count mismatch for video '" + appearance.video_id + "'");

  VideoDetections out;
  out.video_id = appearance.video_id;
  out.frames.reserve(appearance.num_frames());
  for (std::size_t t = 0; t < appearance.num_frames(); ++t)
    out.frames.push_back(fuse_frame(appearance.frames[t], motion.frames[t], cfg));
  return out;
}

}  // namespace tubelink
