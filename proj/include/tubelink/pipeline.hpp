#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/fusion.hpp"
#include "tubelink/parallel.hpp"
#include "tubelink/pathing.hpp"
#include "tubelink/trimming.hpp"

namespace tubelink {

struct PipelineOptions {
  FusionConfig fusion;
  PathConfig path;
  TrimConfig trim;
  bool two_pass = true;  // false emits every path untrimmed as a single tube
  std::size_t workers = 1;
};

namespace pipeline_detail {

template <typename T>
std::vector<T> flatten(std::vector<std::vector<T>> parts) {
  std::vector<T> out;
  for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return out;
}

inline std::vector<const VideoDetections*> by_video_id(const std::vector<VideoDetections>& videos) {
  std::vector<const VideoDetections*> out;
  for (const auto& v : videos) out.push_back(&v);
  std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->video_id < b->video_id; });
  return out;
}

}  // namespace pipeline_detail

// Fuses every appearance video with the motion video of the same id.
// Output is ordered by video id.
inline std::vector<VideoDetections> fuse_all(const std::vector<VideoDetections>& appearance,
                                             const std::vector<VideoDetections>& motion,
                                             const FusionConfig& cfg, std::size_t workers) {
  validate(cfg);
  std::map<std::string, const VideoDetections*> motion_by_id;
  for (const auto& m : motion) motion_by_id[m.video_id] = &m;
  const auto videos = pipeline_detail::by_video_id(appearance);
  for (const auto* v : videos)
    if (!motion_by_id.contains(v->video_id))
      throw DataError("video '" + v->video_id + "' has no motion-stream record");
  return parallel_map(videos.size(), workers, [&](std::size_t i) {
    return fuse_video(*videos[i], *motion_by_id.at(videos[i]->video_id), cfg);
  });
}

inline std::vector<ActionPath> link_all(const std::vector<VideoDetections>& fused, const PathConfig& cfg,
                                        std::size_t workers) {
  validate(cfg);
  const auto videos = pipeline_detail::by_video_id(fused);
  return pipeline_detail::flatten(
      parallel_map(videos.size(), workers, [&](std::size_t i) { return link_video(*videos[i], cfg); }));
}

// Trims paths grouped per video; paths keep their input order within a video.
inline std::vector<ActionTube> trim_all(const std::vector<ActionPath>& paths, const TrimConfig& cfg,
                                        std::size_t workers) {
  validate(cfg);
  std::map<std::string, std::vector<ActionPath>> groups;
  for (const auto& p : paths) groups[p.video_id].push_back(p);
  std::vector<const std::vector<ActionPath>*> items;
  for (const auto& [_, g] : groups) items.push_back(&g);
  return pipeline_detail::flatten(
      parallel_map(items.size(), workers, [&](std::size_t i) { return trim_paths(*items[i], cfg); }));
}

// Fusion, linking and trimming end to end, one video per work item. Results
// are merged in video-id order, independent of the worker count.
inline std::vector<ActionTube> run_pipeline(const std::vector<VideoDetections>& appearance,
                                            const std::vector<VideoDetections>& motion,
                                            const PipelineOptions& opts) {
  validate(opts.fusion);
  validate(opts.path);
  validate(opts.trim);
  std::map<std::string, const VideoDetections*> motion_by_id;
  for (const auto& m : motion) motion_by_id[m.video_id] = &m;
  const auto videos = pipeline_detail::by_video_id(appearance);
  for (const auto* v : videos)
    if (!motion_by_id.contains(v->video_id))
      throw DataError("video '" + v->video_id + "' has no motion-stream record");
  return pipeline_detail::flatten(parallel_map(videos.size(), opts.workers, [&](std::size_t i) {
    const auto fused = fuse_video(*videos[i], *motion_by_id.at(videos[i]->video_id), opts.fusion);
    const auto paths = link_video(fused, opts.path);
    return opts.two_pass ? trim_paths(paths, opts.trim) : untrimmed_tubes(paths, opts.trim);
  }));
}

}  // namespace tubelink
