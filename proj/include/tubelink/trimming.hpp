#pragma once

// Second pass: binary action/background labelling of each path under a Potts
// smoothness prior, then run decomposition into scored action tubes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/pathing.hpp"

namespace tubelink {

enum class BackgroundScoreMode {
  complement,  // max(0, 1 - raw class score)
  constant,    // TrimConfig::background_constant
};

enum class ForegroundScores { augmented, raw };

struct TrimConfig {
  double lambda_l = 1.0;
  double alpha_default = 1.0;
  std::map<ClassId, double> alpha;  // per-class overrides of alpha_default
  BackgroundScoreMode background_mode = BackgroundScoreMode::complement;
  double background_constant = 0.0;
  ForegroundScores foreground = ForegroundScores::augmented;
  std::size_t top_k = 40;

  double alpha_for(ClassId c) const {
    auto it = alpha.find(c);
    return it == alpha.end() ? alpha_default : it->second;
  }

  // Cost of a label change between adjacent frames.
  double switch_penalty(ClassId c) const { return lambda_l * alpha_for(c); }
};

inline void validate(const TrimConfig& cfg) {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(cfg.lambda_l)) throw UsageError("lambda_l must be >= 0");
  if (!ok(cfg.alpha_default)) throw UsageError("alpha must be >= 0");
  for (const auto& [c, a] : cfg.alpha)
    if (c < 0 || !ok(a)) throw UsageError("alpha overrides need a class id >= 0 and a value >= 0");
  if (!std::isfinite(cfg.background_constant)) throw UsageError("background constant must be finite");
  if (cfg.top_k < 1) throw UsageError("top_k must be >= 1");
}

inline double foreground_unary(const PathNode& n, const TrimConfig& cfg) {
  return cfg.foreground == ForegroundScores::augmented ? n.score : n.raw_score;
}

inline double background_unary(const PathNode& n, const TrimConfig& cfg) {
  if (cfg.background_mode == BackgroundScoreMode::constant) return cfg.background_constant;
  return std::max(0.0, 1.0 - n.raw_score);
}

inline double unary(const PathNode& n, Label l, const TrimConfig& cfg) {
  return l == Label::action ? foreground_unary(n, cfg) : background_unary(n, cfg);
}

// Value of the labelling objective: unaries minus the Potts switching cost.
inline double labelling_objective(const ActionPath& path, const Labelling& labels, const TrimConfig& cfg) {
  if (labels.size() != path.nodes.size()) throw DataError("labelling length differs from path length");
  const double penalty = cfg.switch_penalty(path.class_id);
  double unaries = 0.0;
  double switches = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    unaries += unary(path.nodes[t], labels[t], cfg);
    if (t > 0 && labels[t] != labels[t - 1]) switches += penalty;
  }
  return unaries - switches;
}

// Exact two-state Viterbi. Suffix values are computed backwards and the
// labelling is decoded forwards, so among equal-objective labellings the one
// that is action at the first differing frame wins.
inline Labelling trim_path(const ActionPath& path, const TrimConfig& cfg) {
  validate(cfg);
  const std::size_t T = path.nodes.size();
  Labelling labels(T, Label::background);
  if (T == 0) return labels;
  const double penalty = cfg.switch_penalty(path.class_id);

  // suffix[t][l]: best objective of frames t..T-1 given label l at frame t.
  std::vector<std::array<double, 2>> suffix(T);
  for (std::size_t t = T; t-- > 0;) {
    for (Label l : {Label::background, Label::action}) {
      double v = unary(path.nodes[t], l, cfg);
      if (t + 1 < T) {
        const auto& next = suffix[t + 1];
        const double stay = next[static_cast<std::size_t>(l)];
        const double move = next[1 - static_cast<std::size_t>(l)] - penalty;
        v += std::max(stay, move);
      }
      suffix[t][static_cast<std::size_t>(l)] = v;
    }
  }

  auto pick = [&](std::size_t t, double fg, double bg) { labels[t] = fg >= bg ? Label::action : Label::background; };
  pick(0, suffix[0][1], suffix[0][0]);
  for (std::size_t t = 1; t < T; ++t) {
    const bool prev_fg = labels[t - 1] == Label::action;
    pick(t, suffix[t][1] - (prev_fg ? 0.0 : penalty), suffix[t][0] - (prev_fg ? penalty : 0.0));
  }
  return labels;
}

// Mean of the min(k, n) largest values.
inline double top_k_mean(std::vector<double> values, std::size_t k) {
  if (values.empty()) return 0.0;
  const std::size_t n = std::min(k, values.size());
  std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n), values.end(),
                    std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += values[i];
  return sum / static_cast<double>(n);
}

inline ActionTube make_tube(const ActionPath& path, std::size_t begin, std::size_t end, std::size_t top_k) {
  ActionTube tube;
  tube.video_id = path.video_id;
  tube.class_id = path.class_id;
  tube.start_frame = begin;
  std::vector<double> scores;
  for (std::size_t t = begin; t < end; ++t) {
    tube.boxes.push_back(path.nodes[t].box);
    scores.push_back(path.nodes[t].score);
  }
  tube.score = top_k_mean(std::move(scores), top_k);
  return tube;
}

// One tube per maximal run of action labels, scored by the top-k mean of the
// run's augmented scores.
inline std::vector<ActionTube> cut_tubes(const ActionPath& path, const Labelling& labels, const TrimConfig& cfg) {
  if (labels.size() != path.nodes.size()) throw DataError("labelling length differs from path length");
  std::vector<ActionTube> tubes;
  std::size_t t = 0;
  while (t < labels.size()) {
    if (labels[t] != Label::action) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < labels.size() && labels[end] == Label::action) ++end;
    tubes.push_back(make_tube(path, t, end, cfg.top_k));
    t = end;
  }
  return tubes;
}

inline std::vector<ActionTube> trim_paths(const std::vector<ActionPath>& paths, const TrimConfig& cfg) {
  std::vector<ActionTube> tubes;
  for (const auto& p : paths) {
    auto cut = cut_tubes(p, trim_path(p, cfg), cfg);
    tubes.insert(tubes.end(), std::make_move_iterator(cut.begin()), std::make_move_iterator(cut.end()));
  }
  return tubes;
}

// Single-pass variant: every path becomes one full-length tube.
inline std::vector<ActionTube> untrimmed_tubes(const std::vector<ActionPath>& paths, const TrimConfig& cfg) {
  std::vector<ActionTube> tubes;
  for (const auto& p : paths)
    if (!p.nodes.empty()) tubes.push_back(make_tube(p, 0, p.nodes.size(), cfg.top_k));
  return tubes;
}

// Link, trim and cut for every class of a fused video. Tubes are ordered by
// class, then extraction round, then start frame.
inline std::vector<ActionTube> build_tubes(const VideoDetections& video, const PathConfig& path_cfg,
                                           const TrimConfig& trim_cfg) {
  validate(trim_cfg);
  return trim_paths(link_video(video, path_cfg), trim_cfg);
}

}  // namespace tubelink
