#pragma once

// Line-delimited JSON interchange format. One record per line, UTF-8.
// Frame indices are 1-based on disk and 0-based in memory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"

namespace tubelink {

namespace io_detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline const json& field(const json& rec, const char* key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) throw SchemaError(std::string("missing field '") + key + "'", line);
  return *it;
}

inline double number(const json& j, const char* what, std::size_t line) {
  if (!j.is_number()) throw SchemaError(std::string(what) + " must be a number", line);
  return j.get<double>();
}

inline long long integer(const json& j, const char* what, std::size_t line) {
  if (!j.is_number_integer()) throw SchemaError(std::string(what) + " must be an integer", line);
  return j.get<long long>();
}

inline std::string string(const json& j, const char* what, std::size_t line) {
  if (!j.is_string()) throw SchemaError(std::string(what) + " must be a string", line);
  return j.get<std::string>();
}

inline const json& array(const json& j, const char* what, std::size_t line) {
  if (!j.is_array()) throw SchemaError(std::string(what) + " must be an array", line);
  return j;
}

inline Box box(const json& j, std::size_t line) {
  array(j, "box", line);
  if (j.size() != 4) throw SchemaError("box must have 4 coordinates", line);
  Box b{number(j[0], "box", line), number(j[1], "box", line), number(j[2], "box", line),
        number(j[3], "box", line)};
  if (!is_valid(b)) throw DegenerateBoxError("degenerate or non-finite box", line);
  return b;
}

inline std::vector<double> numbers(const json& j, const char* what, std::size_t line) {
  array(j, what, line);
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what, line));
  return out;
}

inline ojson to_json(const Box& b) { return ojson::array({b.x1, b.y1, b.x2, b.y2}); }

inline ojson to_json(const std::vector<Box>& boxes) {
  ojson arr = ojson::array();
  for (const auto& b : boxes) arr.push_back(to_json(b));
  return arr;
}

// Calls `fn(record, line)` for every non-blank line of `in`.
inline void for_each_record(std::istream& in, const std::function<void(const json&, std::size_t)>& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw SyntaxError(std::string("malformed record: ") + e.what(), line);
    }
    if (!rec.is_object()) throw SyntaxError("record is not a JSON object", line);
    fn(rec, line);
  }
  if (in.bad()) throw IoError("read failure");
}

template <typename Tube>
Tube tube_common(const json& rec, std::size_t line) {
  Tube t;
  t.video_id = string(field(rec, "video_id", line), "video_id", line);
  const long long cls = integer(field(rec, "class_id", line), "class_id", line);
  const long long start = integer(field(rec, "start_frame", line), "start_frame", line);
  const long long end = integer(field(rec, "end_frame", line), "end_frame", line);
  if (cls < 0) throw SchemaError("class_id must be non-negative", line);
  if (start < 1) throw FrameOrderError("start_frame must be >= 1", line);
  if (end < start) throw FrameOrderError("start_frame > end_frame", line);
  t.class_id = static_cast<ClassId>(cls);
  t.start_frame = static_cast<std::size_t>(start - 1);
  const auto& boxes = array(field(rec, "boxes", line), "boxes", line);
  if (boxes.size() != static_cast<std::size_t>(end - start + 1))
    throw SchemaError("boxes count does not match the frame range", line);
  for (const auto& b : boxes) t.boxes.push_back(box(b, line));
  return t;
}

template <typename Tube>
ojson tube_json(const Tube& t) {
  ojson j;
  j["video_id"] = t.video_id;
  j["class_id"] = t.class_id;
  j["start_frame"] = t.start_frame + 1;
  j["end_frame"] = t.end_frame() + 1;
  return j;
}

}  // namespace io_detail

// ---- detections -------------------------------------------------------------

// Reads a detections file. The class count is taken from `num_classes` when
// given, otherwise from the first detection in the stream.
inline std::vector<VideoDetections> read_detections(std::istream& in,
                                                    std::optional<std::size_t> num_classes = {}) {
  using namespace io_detail;
  std::vector<VideoDetections> videos;
  std::set<std::string> seen;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    VideoDetections v;
    v.video_id = string(field(rec, "video_id", line), "video_id", line);
    if (v.video_id.empty()) throw SchemaError("empty video_id", line);
    if (!seen.insert(v.video_id).second) throw SchemaError("duplicate video_id '" + v.video_id + "'", line);
    const long long T = integer(field(rec, "num_frames", line), "num_frames", line);
    if (T < 1) throw SchemaError("num_frames must be at least 1", line);
    v.frames.resize(static_cast<std::size_t>(T));
    long long prev = 0;
    for (const auto& fr : array(field(rec, "frames", line), "frames", line)) {
      if (!fr.is_object()) throw SchemaError("frame entry must be an object", line);
      const long long idx = integer(field(fr, "frame_index", line), "frame_index", line);
      if (idx <= prev || idx > T)
        throw FrameOrderError("frame_index " + std::to_string(idx) +
                                  " is not increasing within [1, num_frames]",
                              line);
      prev = idx;
      auto& frame = v.frames[static_cast<std::size_t>(idx - 1)];
      for (const auto& d : array(field(fr, "detections", line), "detections", line)) {
        if (!d.is_object()) throw SchemaError("detection must be an object", line);
        DetectionBox det;
        det.box = box(field(d, "box", line), line);
        det.scores = numbers(field(d, "scores", line), "scores", line);
        if (auto it = d.find("raw_scores"); it != d.end())
          det.raw_scores = numbers(*it, "raw_scores", line);
        if (!num_classes) num_classes = det.scores.size();
        frame.push_back(std::move(det));
      }
    }
    validate(v, num_classes.value_or(0), line);
    videos.push_back(std::move(v));
  });
  return videos;
}

inline void write_detections(std::ostream& out, const std::vector<VideoDetections>& videos) {
  using namespace io_detail;
  for (const auto& v : videos) {
    validate(v, v.num_classes());
    ojson rec;
    rec["video_id"] = v.video_id;
    rec["num_frames"] = v.num_frames();
    ojson frames = ojson::array();
    for (std::size_t t = 0; t < v.frames.size(); ++t) {
      ojson dets = ojson::array();
      for (const auto& d : v.frames[t]) {
        ojson jd;
        jd["box"] = to_json(d.box);
        jd["scores"] = d.scores;
        if (!d.raw_scores.empty()) jd["raw_scores"] = d.raw_scores;
        dets.push_back(std::move(jd));
      }
      ojson jf;
      jf["frame_index"] = t + 1;
      jf["detections"] = std::move(dets);
      frames.push_back(std::move(jf));
    }
    rec["frames"] = std::move(frames);
    out << rec.dump() << '\n';
  }
}

// ---- paths ------------------------------------------------------------------

inline std::vector<ActionPath> read_paths(std::istream& in) {
  using namespace io_detail;
  std::vector<ActionPath> paths;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    ActionPath p;
    p.video_id = string(field(rec, "video_id", line), "video_id", line);
    const long long cls = integer(field(rec, "class_id", line), "class_id", line);
    if (cls < 0) throw SchemaError("class_id must be non-negative", line);
    p.class_id = static_cast<ClassId>(cls);
    p.energy = number(field(rec, "energy", line), "energy", line);
    for (const auto& n : array(field(rec, "nodes", line), "nodes", line)) {
      if (!n.is_object()) throw SchemaError("path node must be an object", line);
      PathNode node;
      const long long idx = integer(field(n, "box_index", line), "box_index", line);
      if (idx < 0) throw SchemaError("box_index must be non-negative", line);
      node.box_index = static_cast<std::size_t>(idx);
      node.box = box(field(n, "box", line), line);
      node.score = number(field(n, "score", line), "score", line);
      node.raw_score = number(field(n, "raw_score", line), "raw_score", line);
      p.nodes.push_back(node);
    }
    validate(p, line);
    paths.push_back(std::move(p));
  });
  return paths;
}

inline void write_paths(std::ostream& out, const std::vector<ActionPath>& paths) {
  using namespace io_detail;
  for (const auto& p : paths) {
    validate(p);
    ojson rec;
    rec["video_id"] = p.video_id;
    rec["class_id"] = p.class_id;
    rec["energy"] = p.energy;
    ojson nodes = ojson::array();
    for (const auto& n : p.nodes) {
      ojson jn;
      jn["box_index"] = n.box_index;
      jn["box"] = to_json(n.box);
      jn["score"] = n.score;
      jn["raw_score"] = n.raw_score;
      nodes.push_back(std::move(jn));
    }
    rec["nodes"] = std::move(nodes);
    out << rec.dump() << '\n';
  }
}

// ---- tubes and ground truth ---------------------------------------------------

inline std::vector<ActionTube> read_tubes(std::istream& in) {
  using namespace io_detail;
  std::vector<ActionTube> tubes;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    auto t = tube_common<ActionTube>(rec, line);
    t.score = number(field(rec, "score", line), "score", line);
    validate(t, line);
    tubes.push_back(std::move(t));
  });
  return tubes;
}

inline void write_tubes(std::ostream& out, const std::vector<ActionTube>& tubes) {
  using namespace io_detail;
  for (const auto& t : tubes) {
    validate(t);
    ojson rec = tube_json(t);
    rec["score"] = t.score;
    rec["boxes"] = to_json(t.boxes);
    out << rec.dump() << '\n';
  }
}

inline std::vector<GroundTruthTube> read_ground_truth(std::istream& in) {
  using namespace io_detail;
  std::vector<GroundTruthTube> tubes;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    auto t = tube_common<GroundTruthTube>(rec, line);
    validate(t, line);
    tubes.push_back(std::move(t));
  });
  return tubes;
}

inline void write_ground_truth(std::ostream& out, const std::vector<GroundTruthTube>& tubes) {
  using namespace io_detail;
  for (const auto& t : tubes) {
    validate(t);
    ojson rec = tube_json(t);
    rec["boxes"] = to_json(t.boxes);
    out << rec.dump() << '\n';
  }
}

// ---- files ------------------------------------------------------------------

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

// Writes via a sibling temporary file and renames it into place, so readers
// never observe a partially written output.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::function<void(std::ostream&)>& writer) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) throw IoError("write failure on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

inline std::vector<VideoDetections> load_detections(const std::filesystem::path& path,
                                                    std::optional<std::size_t> num_classes = {}) {
  auto in = open_input(path);
  return read_detections(in, num_classes);
}

inline void save_detections(const std::filesystem::path& path, const std::vector<VideoDetections>& v) {
  write_file_atomic(path, [&](std::ostream& out) { write_detections(out, v); });
}

inline std::vector<ActionPath> load_paths(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_paths(in);
}

inline void save_paths(const std::filesystem::path& path, const std::vector<ActionPath>& p) {
  write_file_atomic(path, [&](std::ostream& out) { write_paths(out, p); });
}

inline std::vector<ActionTube> load_tubes(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tubes(in);
}

inline void save_tubes(const std::filesystem::path& path, const std::vector<ActionTube>& t) {
  write_file_atomic(path, [&](std::ostream& out) { write_tubes(out, t); });
}

inline std::vector<GroundTruthTube> load_ground_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_ground_truth(in);
}

inline void save_ground_truth(const std::filesystem::path& path, const std::vector<GroundTruthTube>& t) {
  write_file_atomic(path, [&](std::ostream& out) { write_ground_truth(out, t); });
}

// JSON Schema (draft 2020-12) describing every record type.
inline const char* interchange_schema() {
  return R"schema({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "tubelink interchange records (one JSON object per line, UTF-8)",
  "$defs": {
    "box": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4,
            "description": "[x1, y1, x2, y2] with x2 > x1 and y2 > y1"},
    "scores": {"type": "array", "items": {"type": "number", "minimum": 0},
               "description": "one entry per action class"},
    "detections": {
      "type": "object",
      "required": ["video_id", "num_frames", "frames"],
      "properties": {
        "video_id": {"type": "string", "minLength": 1},
        "num_frames": {"type": "integer", "minimum": 1},
        "frames": {"type": "array", "description": "frame_index strictly increasing; omitted frames are empty",
          "items": {"type": "object", "required": ["frame_index", "detections"],
            "properties": {
              "frame_index": {"type": "integer", "minimum": 1, "description": "1-based"},
              "detections": {"type": "array", "items": {"type": "object", "required": ["box", "scores"],
                "properties": {"box": {"$ref": "#/$defs/box"}, "scores": {"$ref": "#/$defs/scores"},
                               "raw_scores": {"$ref": "#/$defs/scores", "description": "pre-fusion scores"}}}}}}}
      }
    },
    "path": {
      "type": "object",
      "required": ["video_id", "class_id", "energy", "nodes"],
      "properties": {
        "video_id": {"type": "string"}, "class_id": {"type": "integer", "minimum": 0},
        "energy": {"type": "number"},
        "nodes": {"type": "array", "description": "one per frame",
          "items": {"type": "object", "required": ["box_index", "box", "score", "raw_score"],
            "properties": {"box_index": {"type": "integer", "minimum": 0}, "box": {"$ref": "#/$defs/box"},
                           "score": {"type": "number"}, "raw_score": {"type": "number"}}}}
      }
    },
    "tube": {
      "type": "object",
      "required": ["video_id", "class_id", "start_frame", "end_frame", "score", "boxes"],
      "properties": {
        "video_id": {"type": "string"}, "class_id": {"type": "integer", "minimum": 0},
        "start_frame": {"type": "integer", "minimum": 1}, "end_frame": {"type": "integer", "minimum": 1},
        "score": {"type": "number"},
        "boxes": {"type": "array", "items": {"$ref": "#/$defs/box"}, "description": "end_frame - start_frame + 1 boxes"}
      }
    },
    "ground_truth": {
      "type": "object",
      "required": ["video_id", "class_id", "start_frame", "end_frame", "boxes"],
      "properties": {
        "video_id": {"type": "string"}, "class_id": {"type": "integer", "minimum": 0},
        "start_frame": {"type": "integer", "minimum": 1}, "end_frame": {"type": "integer", "minimum": 1},
        "boxes": {"type": "array", "items": {"$ref": "#/$defs/box"}}
      }
    }
  }
}
)schema";
}

}  // namespace tubelink
