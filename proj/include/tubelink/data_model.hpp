#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tubelink/errors.hpp"
#include "tubelink/geometry.hpp"

namespace tubelink {

using ClassId = int;

// Ordered foreground action classes. Ids are 0..size()-1; background is not
// a catalog entry and is represented by the sentinel id size().
class ClassCatalog {
 public:
  explicit ClassCatalog(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw SchemaError("class catalog is empty");
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty()) throw SchemaError("class catalog has an empty name");
      if (!index_.emplace(names_[i], static_cast<ClassId>(i)).second)
        throw SchemaError("duplicate class name '" + names_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  ClassId background() const noexcept { return static_cast<ClassId>(names_.size()); }
  const std::string& name(ClassId c) const { return names_.at(static_cast<std::size_t>(c)); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<ClassId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ClassId> index_;
};

struct DetectionBox {
  Box box;
  // Current per-class scores; augmented scores once fusion has run.
  std::vector<double> scores;
  // Pre-fusion scores. Empty means `scores` has not been augmented.
  std::vector<double> raw_scores;

  double score(ClassId c) const { return scores[static_cast<std::size_t>(c)]; }
  double raw_score(ClassId c) const {
    return raw_scores.empty() ? score(c) : raw_scores[static_cast<std::size_t>(c)];
  }

  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

using Frame = std::vector<DetectionBox>;

struct VideoDetections {
  std::string video_id;
  std::vector<Frame> frames;  // 0-based internally, one entry per frame

  std::size_t num_frames() const noexcept { return frames.size(); }

  // Score-vector length of the first detection, or 0 for a video without any.
  std::size_t num_classes() const noexcept {
    for (const auto& f : frames)
      if (!f.empty()) return f.front().scores.size();
    return 0;
  }

  friend bool operator==(const VideoDetections&, const VideoDetections&) = default;
};

struct PathNode {
  std::size_t box_index = 0;  // index into the frame's detection list
  Box box;
  double score = 0.0;      // augmented class score
  double raw_score = 0.0;  // pre-fusion class score

  friend bool operator==(const PathNode&, const PathNode&) = default;
};

// One box per frame over the whole video for a single class.
struct ActionPath {
  std::string video_id;
  ClassId class_id = 0;
  std::vector<PathNode> nodes;
  double energy = 0.0;

  std::size_t num_frames() const noexcept { return nodes.size(); }

  friend bool operator==(const ActionPath&, const ActionPath&) = default;
};

enum class Label : unsigned char { background = 0, action = 1 };
using Labelling = std::vector<Label>;

struct ActionTube {
  std::string video_id;
  ClassId class_id = 0;
  std::size_t start_frame = 0;  // 0-based, inclusive
  std::vector<Box> boxes;       // one per frame from start_frame on
  double score = 0.0;

  std::size_t end_frame() const noexcept { return start_frame + boxes.size() - 1; }

  friend bool operator==(const ActionTube&, const ActionTube&) = default;
};

struct GroundTruthTube {
  std::string video_id;
  ClassId class_id = 0;
  std::size_t start_frame = 0;
  std::vector<Box> boxes;

  std::size_t end_frame() const noexcept { return start_frame + boxes.size() - 1; }

  friend bool operator==(const GroundTruthTube&, const GroundTruthTube&) = default;
};

namespace detail {

inline void check_scores(const std::vector<double>& s, std::size_t num_classes,
                         std::size_t line, const char* what) {
  if (s.size() != num_classes)
    throw ScoreLengthError(std::string(what) + " vector has length " + std::to_string(s.size()) +
                               ", expected " + std::to_string(num_classes),
                           line);
  for (double v : s)
    if (!std::isfinite(v) || v < 0.0)
      throw SchemaError(std::string(what) + " must be finite and non-negative", line);
}

template <typename Tube>
void check_tube(const Tube& t, std::size_t line) {
  if (t.video_id.empty()) throw SchemaError("tube has an empty video_id", line);
  if (t.class_id < 0) throw SchemaError("tube has a negative class_id", line);
  if (t.boxes.empty()) throw SchemaError("tube has start_frame > end_frame", line);
  for (const auto& b : t.boxes)
    if (!is_valid(b)) throw DegenerateBoxError("tube contains a degenerate box", line);
}

}  // namespace detail

// Throws a SchemaError subclass if `v` violates any invariant.
inline void validate(const VideoDetections& v, std::size_t num_classes, std::size_t line = 0) {
  if (v.video_id.empty()) throw SchemaError("empty video_id", line);
  if (v.frames.empty()) throw SchemaError("num_frames must be at least 1", line);
  for (const auto& frame : v.frames) {
    for (const auto& d : frame) {
      if (!is_valid(d.box)) throw DegenerateBoxError("degenerate or non-finite box", line);
      detail::check_scores(d.scores, num_classes, line, "scores");
      if (!d.raw_scores.empty()) detail::check_scores(d.raw_scores, num_classes, line, "raw_scores");
    }
  }
}

inline void validate(const ActionTube& t, std::size_t line = 0) {
  detail::check_tube(t, line);
  if (!std::isfinite(t.score)) throw SchemaError("tube score must be finite", line);
}

inline void validate(const GroundTruthTube& t, std::size_t line = 0) { detail::check_tube(t, line); }

inline void validate(const ActionPath& p, std::size_t line = 0) {
  if (p.video_id.empty()) throw SchemaError("path has an empty video_id", line);
  if (p.class_id < 0) throw SchemaError("path has a negative class_id", line);
  if (p.nodes.empty()) throw SchemaError("path has no frames", line);
  for (const auto& n : p.nodes) {
    if (!is_valid(n.box)) throw DegenerateBoxError("path contains a degenerate box", line);
    if (!std::isfinite(n.score) || !std::isfinite(n.raw_score))
      throw SchemaError("path scores must be finite", line);
  }
}

}  // namespace tubelink
