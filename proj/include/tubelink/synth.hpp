#pragma once

// Deterministic synthetic two-stream detections with planted action
// instances and ground truth.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/random.hpp"

namespace tubelink {

struct PlantSpec {
  ClassId class_id = 0;
  // 0-based inclusive frame range of the action itself.
  std::size_t action_start = 0;
  std::size_t action_end = 0;
  // Range over which the actor is detected at all; defaults to the action
  // range. Outside the action range the class score is `idle_score`.
  std::optional<std::size_t> visible_start;
  std::optional<std::size_t> visible_end;
  Box start_box;  // trajectory is linear from start_box to end_box over the visible range
  Box end_box;
  double peak_score = 0.9;
  std::size_t ramp = 0;  // frames of linear ramp at each end of the action range
  double idle_score = 0.05;

  std::size_t first_visible() const { return visible_start.value_or(action_start); }
  std::size_t last_visible() const { return visible_end.value_or(action_end); }
};

struct ClutterSpec {
  std::size_t per_frame = 0;
  double score_min = 0.0;
  double score_max = 0.3;
  double size_min = 20.0;
  double size_max = 80.0;
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  std::string video_id = "synth";
  std::size_t num_frames = 1;
  std::size_t num_classes = 1;
  double width = 320.0;
  double height = 240.0;
  std::vector<PlantSpec> plants;
  ClutterSpec clutter;
  double box_noise = 0.0;          // std dev of box centre/size jitter, pixels
  double score_noise = 0.0;        // uniform +- amplitude on planted class scores
  double other_class_score = 0.02; // planted boxes score other classes in [0, this]
};

struct Scenario {
  VideoDetections appearance;
  VideoDetections motion;
  std::vector<GroundTruthTube> ground_truth;
};

inline void validate(const ScenarioSpec& spec) {
  if (spec.video_id.empty()) throw SchemaError("scenario video_id is empty");
  if (spec.num_frames < 1) throw SchemaError("scenario needs at least one frame");
  if (spec.num_classes < 1) throw SchemaError("scenario needs at least one class");
  if (!(spec.width > 0 && spec.height > 0)) throw SchemaError("frame size must be positive");
  if (spec.box_noise < 0 || spec.score_noise < 0 || spec.other_class_score < 0)
    throw SchemaError("noise amplitudes must be non-negative");
  const auto& cl = spec.clutter;
  if (!(0 <= cl.score_min && cl.score_min <= cl.score_max)) throw SchemaError("invalid clutter score range");
  if (!(1.0 <= cl.size_min && cl.size_min <= cl.size_max && cl.size_max < std::min(spec.width, spec.height)))
    throw SchemaError("invalid clutter size range");
  for (std::size_t i = 0; i < spec.plants.size(); ++i) {
    const auto& p = spec.plants[i];
    if (p.class_id < 0 || static_cast<std::size_t>(p.class_id) >= spec.num_classes)
      throw SchemaError("plant class out of range");
    if (p.action_start > p.action_end || p.action_end >= spec.num_frames)
      throw SchemaError("plant action range outside the video");
    if (p.first_visible() > p.action_start || p.last_visible() < p.action_end || p.last_visible() >= spec.num_frames)
      throw SchemaError("plant visible range must contain the action range and lie inside the video");
    if (!is_valid(p.start_box) || !is_valid(p.end_box)) throw SchemaError("plant boxes must be valid");
    if (p.peak_score < 0 || p.idle_score < 0) throw SchemaError("plant scores must be non-negative");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& q = spec.plants[j];
      if (q.class_id == p.class_id && q.action_start == p.action_start && q.action_end == p.action_end &&
          q.start_box == p.start_box && q.end_box == p.end_box)
        throw SchemaError("plants " + std::to_string(j) + " and " + std::to_string(i) + " are identical");
    }
  }
}

namespace synth_detail {

inline Box lerp(const Box& a, const Box& b, double w) {
  return {a.x1 + w * (b.x1 - a.x1), a.y1 + w * (b.y1 - a.y1), a.x2 + w * (b.x2 - a.x2), a.y2 + w * (b.y2 - a.y2)};
}

inline Box trajectory(const PlantSpec& p, std::size_t t) {
  const std::size_t first = p.first_visible();
  const std::size_t len = p.last_visible() - first;
  const double w = len == 0 ? 0.0 : static_cast<double>(t - first) / static_cast<double>(len);
  return lerp(p.start_box, p.end_box, w);
}

// Trapezoid: ramps up over `ramp` frames, plateaus at the peak, ramps down.
inline double profile(const PlantSpec& p, std::size_t t) {
  if (t < p.action_start || t > p.action_end) return p.idle_score;
  const double r = static_cast<double>(p.ramp + 1);
  const double up = static_cast<double>(t - p.action_start + 1) / r;
  const double down = static_cast<double>(p.action_end - t + 1) / r;
  return p.peak_score * std::min({1.0, up, down});
}

inline Box jitter(const Box& b, double sigma, Rng& rng) {
  if (sigma == 0.0) return b;
  const double cx = 0.5 * (b.x1 + b.x2) + rng.normal(0.0, sigma);
  const double cy = 0.5 * (b.y1 + b.y2) + rng.normal(0.0, sigma);
  const double w = std::max(1.0, b.x2 - b.x1 + rng.normal(0.0, sigma));
  const double h = std::max(1.0, b.y2 - b.y1 + rng.normal(0.0, sigma));
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

inline DetectionBox planted(const ScenarioSpec& s, const PlantSpec& p, std::size_t t, Rng& rng) {
  DetectionBox d;
  d.box = jitter(trajectory(p, t), s.box_noise, rng);
  d.scores.resize(s.num_classes);
  for (auto& v : d.scores) v = rng.uniform(0.0, s.other_class_score);
  double v = profile(p, t);
  if (s.score_noise > 0) v += rng.uniform(-s.score_noise, s.score_noise);
  d.scores[static_cast<std::size_t>(p.class_id)] = std::clamp(v, 0.0, 1.0);
  return d;
}

inline DetectionBox clutter(const ScenarioSpec& s, Rng& rng) {
  const auto& cl = s.clutter;
  const double w = rng.uniform(cl.size_min, cl.size_max);
  const double h = rng.uniform(cl.size_min, cl.size_max);
  const double x = rng.uniform(0.0, s.width - w);
  const double y = rng.uniform(0.0, s.height - h);
  DetectionBox d;
  d.box = {x, y, x + w, y + h};
  d.scores.resize(s.num_classes);
  for (auto& v : d.scores) v = rng.uniform(cl.score_min, cl.score_max);
  return d;
}

}  // namespace synth_detail

// Pure function of `spec`: the same spec always yields the same scenario.
inline Scenario generate(const ScenarioSpec& spec) {
  validate(spec);
  using namespace synth_detail;
  Rng rng(spec.seed);
  Scenario out;
  out.appearance.video_id = out.motion.video_id = spec.video_id;
  out.appearance.frames.resize(spec.num_frames);
  out.motion.frames.resize(spec.num_frames);
  for (std::size_t t = 0; t < spec.num_frames; ++t) {
    for (const auto& p : spec.plants) {
      if (t < p.first_visible() || t > p.last_visible()) continue;
      out.appearance.frames[t].push_back(planted(spec, p, t, rng));
      out.motion.frames[t].push_back(planted(spec, p, t, rng));
    }
    for (std::size_t k = 0; k < spec.clutter.per_frame; ++k) {
      out.appearance.frames[t].push_back(clutter(spec, rng));
      out.motion.frames[t].push_back(clutter(spec, rng));
    }
  }
  for (const auto& p : spec.plants) {
    GroundTruthTube g;
    g.video_id = spec.video_id;
    g.class_id = p.class_id;
    g.start_frame = p.action_start;
    for (std::size_t t = p.action_start; t <= p.action_end; ++t) g.boxes.push_back(trajectory(p, t));
    out.ground_truth.push_back(std::move(g));
  }
  return out;
}

// ---- spec files -------------------------------------------------------------
// Frame indices in spec files are 1-based like every other on-disk format.

namespace synth_detail {

inline Box box_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw SchemaError("box must be [x1, y1, x2, y2]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline std::size_t frame_from(const nlohmann::json& j, const char* key) {
  const auto v = j.at(key).get<long long>();
  if (v < 1) throw SchemaError(std::string(key) + " must be >= 1");
  return static_cast<std::size_t>(v - 1);
}

}  // namespace synth_detail

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  using namespace synth_detail;
  try {
    ScenarioSpec s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.video_id = j.value("video_id", std::string("synth"));
    s.num_frames = j.at("num_frames").get<std::size_t>();
    s.num_classes = j.value("num_classes", std::size_t{1});
    if (auto it = j.find("frame_size"); it != j.end()) {
      s.width = it->at(0).get<double>();
      s.height = it->at(1).get<double>();
    }
    s.box_noise = j.value("box_noise", 0.0);
    s.score_noise = j.value("score_noise", 0.0);
    s.other_class_score = j.value("other_class_score", s.other_class_score);
    if (auto it = j.find("clutter"); it != j.end()) {
      s.clutter.per_frame = it->value("per_frame", std::size_t{0});
      s.clutter.score_min = it->value("score_min", s.clutter.score_min);
      s.clutter.score_max = it->value("score_max", s.clutter.score_max);
      s.clutter.size_min = it->value("size_min", s.clutter.size_min);
      s.clutter.size_max = it->value("size_max", s.clutter.size_max);
    }
    for (const auto& jp : j.value("plants", nlohmann::json::array())) {
      PlantSpec p;
      p.class_id = jp.at("class_id").get<ClassId>();
      p.action_start = frame_from(jp, "start_frame");
      p.action_end = frame_from(jp, "end_frame");
      if (jp.contains("visible_start")) p.visible_start = frame_from(jp, "visible_start");
      if (jp.contains("visible_end")) p.visible_end = frame_from(jp, "visible_end");
      p.start_box = box_from(jp.at("start_box"));
      p.end_box = jp.contains("end_box") ? box_from(jp.at("end_box")) : p.start_box;
      p.peak_score = jp.value("peak_score", p.peak_score);
      p.ramp = jp.value("ramp", std::size_t{0});
      p.idle_score = jp.value("idle_score", p.idle_score);
      s.plants.push_back(p);
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario spec: ") + e.what());
  }
}

// A spec file holds one scenario object or {"videos": [scenario, ...]}.
inline std::vector<ScenarioSpec> scenarios_from_json(const nlohmann::json& j) {
  std::vector<ScenarioSpec> out;
  if (j.is_object() && j.contains("videos")) {
    for (const auto& v : j.at("videos")) out.push_back(scenario_from_json(v));
  } else {
    out.push_back(scenario_from_json(j));
  }
  return out;
}

}  // namespace tubelink
