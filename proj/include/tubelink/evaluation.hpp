#pragma once

// Spatiotemporal tube overlap, per-class video AP, mAP over overlap
// thresholds, and video-level classification accuracy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/geometry.hpp"

namespace tubelink {

struct EvalConfig {
  std::vector<double> deltas = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
};

inline void validate(const EvalConfig& cfg) {
  if (cfg.deltas.empty()) throw UsageError("at least one delta is required");
  for (double d : cfg.deltas)
    if (!(d > 0.0 && d <= 1.0)) throw UsageError("deltas must lie in (0, 1]");
  if (!std::is_sorted(cfg.deltas.begin(), cfg.deltas.end()))
    throw UsageError("deltas must be sorted ascending");
}

// Temporal IoU of the frame ranges times the mean per-frame box IoU over the
// frames both tubes share. Tubes from different videos do not overlap.
template <typename TubeA, typename TubeB>
double tube_iou(const TubeA& a, const TubeB& b) {
  if (a.video_id != b.video_id || a.boxes.empty() || b.boxes.empty()) return 0.0;
  const std::size_t lo = std::max(a.start_frame, b.start_frame);
  const std::size_t hi = std::min(a.end_frame(), b.end_frame());
  if (lo > hi) return 0.0;
  const std::size_t shared = hi - lo + 1;
  const std::size_t spanned = std::max(a.end_frame(), b.end_frame()) - std::min(a.start_frame, b.start_frame) + 1;
  double spatial = 0.0;
  for (std::size_t t = lo; t <= hi; ++t) spatial += iou(a.boxes[t - a.start_frame], b.boxes[t - b.start_frame]);
  const double temporal = static_cast<double>(shared) / static_cast<double>(spanned);
  return temporal * (spatial / static_cast<double>(shared));
}

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct ClassAp {
  std::optional<double> ap;  // empty when the class has no ground truth
  std::size_t num_gt = 0;
  std::size_t num_pred = 0;
  std::size_t true_positives = 0;
  std::vector<PrPoint> curve;  // one point per ranked prediction
};

// Greedy one-to-one matching: predictions in descending score order (stable
// for equal scores) each take the unmatched same-video ground truth with the
// highest overlap, and count as true positives when that overlap is >= delta.
// Returns the true-positive flag of every prediction in ranked order and the
// ranking itself.
inline std::pair<std::vector<bool>, std::vector<std::size_t>> match_tubes(std::span<const ActionTube> preds,
                                                                          std::span<const GroundTruthTube> gts,
                                                                          double delta) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  std::unordered_map<std::string, std::vector<std::size_t>> by_video;
  for (std::size_t g = 0; g < gts.size(); ++g) by_video[gts[g].video_id].push_back(g);

  std::vector<bool> used(gts.size(), false);
  std::vector<bool> tp(preds.size(), false);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& p = preds[order[r]];
    auto it = by_video.find(p.video_id);
    if (it == by_video.end()) continue;
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t g : it->second) {
      if (used[g]) continue;
      const double o = tube_iou(p, gts[g]);
      if (o > best) {
        best = o;
        arg = g;
      }
    }
    if (best >= delta) {
      used[arg] = true;
      tp[r] = true;
    }
  }
  return {std::move(tp), std::move(order)};
}

// All-points interpolated AP of one class: sum over ranks of
// (R_i - R_{i-1}) * max_{j >= i} P_j.
inline ClassAp average_precision(std::span<const ActionTube> preds, std::span<const GroundTruthTube> gts,
                                 double delta) {
  ClassAp out;
  out.num_gt = gts.size();
  out.num_pred = preds.size();
  const auto [tp, order] = match_tubes(preds, gts, delta);

  std::size_t hits = 0;
  out.curve.reserve(preds.size());
  for (std::size_t r = 0; r < tp.size(); ++r) {
    hits += tp[r] ? 1 : 0;
    const double recall = gts.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(gts.size());
    out.curve.push_back({recall, static_cast<double>(hits) / static_cast<double>(r + 1)});
  }
  out.true_positives = hits;
  if (gts.empty()) return out;

  std::vector<double> envelope(out.curve.size());
  double running = 0.0;
  for (std::size_t r = out.curve.size(); r-- > 0;) {
    running = std::max(running, out.curve[r].precision);
    envelope[r] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t r = 0; r < out.curve.size(); ++r) {
    ap += (out.curve[r].recall - prev_recall) * envelope[r];
    prev_recall = out.curve[r].recall;
  }
  out.ap = ap;
  return out;
}

struct VideoDiagnostics {
  std::string video_id;
  std::size_t num_pred = 0;
  std::size_t num_gt = 0;
  std::optional<ClassId> predicted_class;
  std::optional<ClassId> true_class;
  std::vector<std::size_t> matched;  // true positives per delta
};

struct EvalReport {
  std::vector<double> deltas;
  std::vector<ClassId> classes;         // classes with ground truth, ascending
  std::vector<ClassId> absent_classes;  // predicted but without ground truth
  std::map<ClassId, std::vector<ClassAp>> per_class;  // indexed like deltas
  std::vector<std::optional<double>> map;             // indexed like deltas
  std::optional<double> accuracy;
  std::size_t videos_classified = 0;
  std::size_t videos_correct = 0;
  std::vector<VideoDiagnostics> videos;  // sorted by video id
};

namespace eval_detail {

// Most frequent ground-truth class of a video; ties go to the lower id.
inline ClassId majority_class(const std::vector<ClassId>& classes) {
  std::map<ClassId, std::size_t> counts;
  for (ClassId c : classes) ++counts[c];
  ClassId best = counts.begin()->first;
  for (const auto& [c, n] : counts)
    if (n > counts[best]) best = c;
  return best;
}

}  // namespace eval_detail

inline EvalReport evaluate(const std::vector<ActionTube>& tubes, const std::vector<GroundTruthTube>& gts,
                           const EvalConfig& cfg) {
  validate(cfg);
  EvalReport report;
  report.deltas = cfg.deltas;

  std::map<ClassId, std::vector<ActionTube>> pred_by_class;
  std::map<ClassId, std::vector<GroundTruthTube>> gt_by_class;
  for (const auto& t : tubes) pred_by_class[t.class_id].push_back(t);
  for (const auto& g : gts) gt_by_class[g.class_id].push_back(g);
  for (const auto& [c, _] : gt_by_class) report.classes.push_back(c);
  for (const auto& [c, _] : pred_by_class)
    if (!gt_by_class.contains(c)) report.absent_classes.push_back(c);

  static const std::vector<ActionTube> no_preds;
  for (ClassId c : report.classes) {
    auto pit = pred_by_class.find(c);
    const auto& preds = pit == pred_by_class.end() ? no_preds : pit->second;
    auto& row = report.per_class[c];
    for (double d : cfg.deltas) row.push_back(average_precision(preds, gt_by_class[c], d));
  }
  for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
    if (report.classes.empty()) {
      report.map.push_back(std::nullopt);
      continue;
    }
    double sum = 0.0;
    for (ClassId c : report.classes) sum += *report.per_class[c][k].ap;
    report.map.push_back(sum / static_cast<double>(report.classes.size()));
  }

  // Per-video diagnostics and classification by the top-scoring tube.
  std::map<std::string, VideoDiagnostics> videos;
  std::map<std::string, std::vector<ClassId>> gt_classes;
  std::map<std::string, double> best_score;
  for (const auto& g : gts) {
    auto& v = videos[g.video_id];
    ++v.num_gt;
    gt_classes[g.video_id].push_back(g.class_id);
  }
  for (const auto& t : tubes) {
    auto& v = videos[t.video_id];
    ++v.num_pred;
    auto it = best_score.find(t.video_id);
    if (it == best_score.end() || t.score > it->second) {
      best_score[t.video_id] = t.score;
      v.predicted_class = t.class_id;
    }
  }
  for (auto& [id, v] : videos) {
    v.video_id = id;
    v.matched.assign(cfg.deltas.size(), 0);
    if (auto it = gt_classes.find(id); it != gt_classes.end()) {
      v.true_class = eval_detail::majority_class(it->second);
      ++report.videos_classified;
      if (v.predicted_class == v.true_class) ++report.videos_correct;
    }
  }
  for (ClassId c : report.classes) {
    auto pit = pred_by_class.find(c);
    if (pit == pred_by_class.end()) continue;
    for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
      const auto [tp, order] = match_tubes(pit->second, gt_by_class[c], cfg.deltas[k]);
      for (std::size_t r = 0; r < order.size(); ++r)
        if (tp[r]) ++videos[pit->second[order[r]].video_id].matched[k];
    }
  }
  if (report.videos_classified > 0)
    report.accuracy = static_cast<double>(report.videos_correct) / static_cast<double>(report.videos_classified);
  for (auto& [_, v] : videos) report.videos.push_back(std::move(v));
  return report;
}

inline std::string class_label(ClassId c, const ClassCatalog* catalog) {
  if (catalog && c >= 0 && static_cast<std::size_t>(c) < catalog->size()) return catalog->name(c);
  return std::to_string(c);
}

// Human-readable summary: one column per delta, APs and mAP in percent.
inline std::string format_report_table(const EvalReport& r, const ClassCatalog* catalog = nullptr) {
  std::ostringstream os;
  char buf[64];
  std::size_t label_width = 24;
  for (ClassId c : r.classes) label_width = std::max(label_width, class_label(c, catalog).size() + 2);
  auto label = [&](const std::string& s) {
    os << s << std::string(label_width > s.size() ? label_width - s.size() : 1, ' ');
  };
  auto cell = [&](const std::optional<double>& v) {
    if (v)
      std::snprintf(buf, sizeof buf, "%9.2f", 100.0 * *v);
    else
      std::snprintf(buf, sizeof buf, "%9s", "-");
    os << buf;
  };
  label("overlap threshold delta");
  for (double d : r.deltas) {
    std::snprintf(buf, sizeof buf, "%9.2f", d);
    os << buf;
  }
  os << '\n';
  for (ClassId c : r.classes) {
    label("AP " + class_label(c, catalog));
    for (const auto& ap : r.per_class.at(c)) cell(ap.ap);
    os << '\n';
  }
  label("mAP");
  for (const auto& m : r.map) cell(m);
  os << '\n';
  if (r.accuracy) {
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *r.accuracy);
    os << "classification accuracy " << buf << "% (" << r.videos_correct << '/' << r.videos_classified
       << " videos)\n";
  }
  if (!r.absent_classes.empty()) {
    os << "classes without ground truth (excluded from mAP):";
    for (ClassId c : r.absent_classes) os << ' ' << class_label(c, catalog);
    os << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json report_json(const EvalReport& r, const ClassCatalog* catalog = nullptr) {
  using ojson = nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  ojson j;
  j["deltas"] = r.deltas;
  ojson maps = ojson::array();
  for (const auto& m : r.map) maps.push_back(opt(m));
  j["map"] = std::move(maps);
  ojson classes = ojson::array();
  for (ClassId c : r.classes) {
    ojson jc;
    jc["class_id"] = c;
    jc["name"] = class_label(c, catalog);
    const auto& row = r.per_class.at(c);
    jc["num_gt"] = row.front().num_gt;
    jc["num_pred"] = row.front().num_pred;
    ojson aps = ojson::array();
    for (const auto& ap : row) aps.push_back(opt(ap.ap));
    jc["ap"] = std::move(aps);
    classes.push_back(std::move(jc));
  }
  j["classes"] = std::move(classes);
  j["absent_classes"] = r.absent_classes;
  j["accuracy"] = opt(r.accuracy);
  j["videos_classified"] = r.videos_classified;
  j["videos_correct"] = r.videos_correct;
  ojson videos = ojson::array();
  for (const auto& v : r.videos) {
    ojson jv;
    jv["video_id"] = v.video_id;
    jv["num_pred"] = v.num_pred;
    jv["num_gt"] = v.num_gt;
    jv["predicted_class"] = v.predicted_class ? ojson(*v.predicted_class) : ojson(nullptr);
    jv["true_class"] = v.true_class ? ojson(*v.true_class) : ojson(nullptr);
    jv["matched"] = v.matched;
    videos.push_back(std::move(jv));
  }
  j["videos"] = std::move(videos);
  return j;
}

// One JSON line per (class, delta) with the ranked precision/recall points.
inline std::string format_pr_dump(const EvalReport& r) {
  std::string out;
  for (ClassId c : r.classes) {
    const auto& row = r.per_class.at(c);
    for (std::size_t k = 0; k < r.deltas.size(); ++k) {
      nlohmann::ordered_json j;
      j["class_id"] = c;
      j["delta"] = r.deltas[k];
      auto pts = nlohmann::ordered_json::array();
      for (const auto& p : row[k].curve) pts.push_back({p.recall, p.precision});
      j["points"] = std::move(pts);
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

}  // namespace tubelink
