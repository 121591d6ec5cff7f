#pragma once

// Command-line front end: fuse, link, trim, pipeline, eval, synth, --schema.
// Exit codes: 0 ok, 1 usage, 2 data, 3 I/O.

#include <cstddef>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tubelink/config.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/evaluation.hpp"
#include "tubelink/io.hpp"
#include "tubelink/pipeline.hpp"
#include "tubelink/synth.hpp"

namespace tubelink::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kIo = 3 };

namespace detail {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::size_t> workers;
  std::optional<std::string> classes;
  std::optional<double> tau;
  std::optional<double> lambda_o;
  std::optional<std::size_t> max_paths;
  std::optional<std::string> empty_frame_policy;
  std::optional<double> score_floor;
  std::optional<double> lambda_l;
  std::optional<double> alpha_default;
  std::vector<std::string> alpha;
  std::optional<std::size_t> top_k;
  std::optional<std::string> background;
  std::optional<double> background_constant;
  std::optional<std::string> foreground_scores;
  bool one_pass = false;
  std::vector<double> deltas;
  std::optional<std::string> appearance, motion, in, out, tubes, gt, report, pr_dump, spec, out_prefix;
};

inline void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  app->add_option("--workers", f.workers, "worker threads (default: $TUBELINK_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  app->add_option("--classes", f.classes, "comma-separated class names, in class-id order");
}

inline void add_fusion(CLI::App* app, Flags& f) {
  app->add_option("--tau", f.tau, "minimum motion IoU for boosting (default 0.3)");
}

inline void add_link(CLI::App* app, Flags& f) {
  app->add_option("--lambda-o", f.lambda_o, "overlap weight of the linking energy (default 1.0)");
  app->add_option("--max-paths", f.max_paths, "paths extracted per class and video (default 10)");
  app->add_option("--empty-frame-policy", f.empty_frame_policy, "skip-class (default) or stop")
      ->check(CLI::IsMember({"skip-class", "stop"}));
  app->add_option("--score-floor", f.score_floor, "ignore boxes scoring below this for a class");
}

inline void add_trim(CLI::App* app, Flags& f) {
  app->add_option("--lambda-l", f.lambda_l, "smoothness weight of the labelling energy (default 1.0)");
  app->add_option("--alpha-default", f.alpha_default, "label-switch cost for every class (default 1.0)");
  app->add_option("--alpha", f.alpha, "per-class switch cost, class=VALUE (name or id)");
  app->add_option("--top-k", f.top_k, "tube score is the mean of the top-k scores (default 40)");
  app->add_option("--background", f.background, "background unary: complement (default) or constant")
      ->check(CLI::IsMember({"complement", "constant"}));
  app->add_option("--background-constant", f.background_constant, "value for --background constant");
  app->add_option("--foreground-scores", f.foreground_scores, "augmented (default) or raw")
      ->check(CLI::IsMember({"augmented", "raw"}));
}

inline void add_eval(CLI::App* app, Flags& f) {
  app->add_option("--deltas", f.deltas, "comma-separated overlap thresholds")->delimiter(',');
  app->add_option("--report", f.report, "machine-readable JSON report");
  app->add_option("--pr-dump", f.pr_dump, "per-class precision/recall points, one JSON line per class and delta");
}

template <typename T>
void overlay(const std::optional<T>& flag, T& dst) {
  if (flag) dst = *flag;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline PipelineConfig build_config(const Flags& f) {
  PipelineConfig cfg = default_config();
  if (f.config) apply_config_file(cfg, *f.config);
  overlay(f.workers, cfg.workers);
  if (f.classes) cfg.classes = split(*f.classes, ',');
  overlay(f.tau, cfg.fusion.tau);
  overlay(f.lambda_o, cfg.path.lambda_o);
  overlay(f.max_paths, cfg.path.max_paths_per_class);
  if (f.empty_frame_policy) cfg.path.empty_frame_policy = parse_empty_frame_policy(*f.empty_frame_policy);
  overlay(f.score_floor, cfg.path.score_floor);
  overlay(f.lambda_l, cfg.trim.lambda_l);
  overlay(f.alpha_default, cfg.trim.alpha_default);
  for (const auto& a : f.alpha) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--alpha expects class=VALUE, got '" + a + "'");
    try {
      std::size_t used = 0;
      const std::string value = a.substr(eq + 1);
      cfg.alpha[a.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw UsageError("--alpha value is not a number in '" + a + "'");
    }
  }
  overlay(f.top_k, cfg.trim.top_k);
  if (f.background) cfg.trim.background_mode = parse_background_mode(*f.background);
  overlay(f.background_constant, cfg.trim.background_constant);
  if (f.foreground_scores) cfg.trim.foreground = parse_foreground_scores(*f.foreground_scores);
  if (f.one_pass) cfg.two_pass = false;
  if (!f.deltas.empty()) cfg.eval.deltas = f.deltas;
  overlay(f.appearance, cfg.io.appearance);
  overlay(f.motion, cfg.io.motion);
  overlay(f.in, cfg.io.input);
  overlay(f.out, cfg.io.out);
  overlay(f.tubes, cfg.io.tubes);
  overlay(f.gt, cfg.io.ground_truth);
  overlay(f.report, cfg.io.report);
  overlay(f.pr_dump, cfg.io.pr_dump);
  overlay(f.spec, cfg.io.spec);
  overlay(f.out_prefix, cfg.io.out_prefix);
  resolve_alpha(cfg);
  validate(cfg);
  return cfg;
}

inline const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required input ") + flag);
  return value;
}

inline std::optional<std::size_t> class_count(const PipelineConfig& cfg) {
  if (cfg.classes.empty()) return std::nullopt;
  return cfg.classes.size();
}

inline void run_fuse(const PipelineConfig& cfg, std::ostream& err) {
  const auto app = load_detections(require(cfg.io.appearance, "--appearance"), class_count(cfg));
  const auto mot = load_detections(require(cfg.io.motion, "--motion"), class_count(cfg));
  const auto& out = require(cfg.io.out, "--out");
  const auto fused = fuse_all(app, mot, cfg.fusion, cfg.workers);
  save_detections(out, fused);
  err << "fuse: " << fused.size() << " videos -> " << out << '\n';
}

inline void run_link(const PipelineConfig& cfg, std::ostream& err) {
  const auto fused = load_detections(require(cfg.io.input, "--in"), class_count(cfg));
  const auto& out = require(cfg.io.out, "--out");
  const auto paths = link_all(fused, cfg.path, cfg.workers);
  save_paths(out, paths);
  err << "link: " << paths.size() << " paths from " << fused.size() << " videos -> " << out << '\n';
}

inline void run_trim(const PipelineConfig& cfg, std::ostream& err) {
  const auto paths = load_paths(require(cfg.io.input, "--in"));
  const auto& out = require(cfg.io.out, "--out");
  std::vector<ActionTube> tubes;
  if (cfg.two_pass) {
    tubes = trim_all(paths, cfg.trim, cfg.workers);
  } else {
    tubes = untrimmed_tubes(paths, cfg.trim);
  }
  save_tubes(out, tubes);
  err << "trim: " << tubes.size() << " tubes from " << paths.size() << " paths -> " << out << '\n';
}

inline void write_eval_outputs(const EvalReport& report, const PipelineConfig& cfg, std::ostream& out) {
  const auto classes = catalog(cfg);
  const ClassCatalog* names = classes ? &*classes : nullptr;
  if (!cfg.io.report.empty())
    write_file_atomic(cfg.io.report, [&](std::ostream& os) { os << report_json(report, names).dump(2) << '\n'; });
  if (!cfg.io.pr_dump.empty())
    write_file_atomic(cfg.io.pr_dump, [&](std::ostream& os) { os << format_pr_dump(report); });
  out << format_report_table(report, names);
}

inline void run_pipeline_cmd(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto app = load_detections(require(cfg.io.appearance, "--appearance"), class_count(cfg));
  const auto mot = load_detections(require(cfg.io.motion, "--motion"), class_count(cfg));
  const auto& dst = require(cfg.io.out, "--out");
  PipelineOptions opts{cfg.fusion, cfg.path, cfg.trim, cfg.two_pass, cfg.workers};
  const auto tubes = run_pipeline(app, mot, opts);
  save_tubes(dst, tubes);
  err << "pipeline: " << tubes.size() << " tubes from " << app.size() << " videos -> " << dst << '\n';
  if (!cfg.io.ground_truth.empty()) {
    const auto gts = load_ground_truth(cfg.io.ground_truth);
    write_eval_outputs(evaluate(tubes, gts, cfg.eval), cfg, out);
  }
}

inline void run_eval(const PipelineConfig& cfg, std::ostream& out) {
  const auto tubes = load_tubes(require(cfg.io.tubes, "--tubes"));
  const auto gts = load_ground_truth(require(cfg.io.ground_truth, "--gt"));
  write_eval_outputs(evaluate(tubes, gts, cfg.eval), cfg, out);
}

inline void run_synth(const PipelineConfig& cfg, std::ostream& err) {
  const auto& spec_path = require(cfg.io.spec, "--spec");
  const auto& prefix = require(cfg.io.out_prefix, "--out-prefix");
  auto in = open_input(spec_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(std::string("scenario spec is not valid JSON: ") + e.what());
  }
  std::vector<VideoDetections> app, mot;
  std::vector<GroundTruthTube> gts;
  for (const auto& spec : scenarios_from_json(j)) {
    auto s = generate(spec);
    app.push_back(std::move(s.appearance));
    mot.push_back(std::move(s.motion));
    gts.insert(gts.end(), s.ground_truth.begin(), s.ground_truth.end());
  }
  save_detections(prefix + "appearance.jsonl", app);
  save_detections(prefix + "motion.jsonl", mot);
  save_ground_truth(prefix + "gt.jsonl", gts);
  err << "synth: " << app.size() << " videos, " << gts.size() << " ground-truth tubes -> " << prefix << "*\n";
}

inline int report_error(std::ostream& err, ExitCode code, const char* kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["code"] = static_cast<int>(code);
  j["message"] = message;
  err << j.dump() << '\n';
  return code;
}

}  // namespace detail

// Runs one CLI invocation. Data goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Two-stream action tube detection: fusion, linking, trimming and evaluation", "tubelink"};
  app.set_version_flag("--version", "tubelink 1.0.0");
  bool schema = false;
  app.add_flag("--schema", schema, "print the interchange-format JSON schema and exit");
  app.require_subcommand(0, 1);

  Flags f;
  auto* fuse = app.add_subcommand("fuse", "boost appearance detections with overlapping motion detections");
  add_common(fuse, f);
  fuse->add_option("--appearance", f.appearance, "appearance-stream detections");
  fuse->add_option("--motion", f.motion, "motion-stream detections");
  fuse->add_option("--out", f.out, "fused detections output");
  add_fusion(fuse, f);

  auto* link = app.add_subcommand("link", "build class-specific action paths");
  add_common(link, f);
  link->add_option("--in", f.in, "fused detections");
  link->add_option("--out", f.out, "paths output");
  add_link(link, f);

  auto* trim = app.add_subcommand("trim", "temporally trim paths into scored action tubes");
  add_common(trim, f);
  trim->add_option("--in", f.in, "paths");
  trim->add_option("--out", f.out, "tubes output");
  trim->add_flag("--one-pass", f.one_pass, "emit every path as one untrimmed tube");
  add_trim(trim, f);

  auto* pipeline = app.add_subcommand("pipeline", "fuse, link and trim end to end");
  add_common(pipeline, f);
  pipeline->add_option("--appearance", f.appearance, "appearance-stream detections");
  pipeline->add_option("--motion", f.motion, "motion-stream detections");
  pipeline->add_option("--out", f.out, "tubes output");
  pipeline->add_option("--gt", f.gt, "optional ground truth to evaluate against");
  pipeline->add_flag("--one-pass", f.one_pass, "skip temporal trimming");
  add_fusion(pipeline, f);
  add_link(pipeline, f);
  add_trim(pipeline, f);
  add_eval(pipeline, f);

  auto* eval = app.add_subcommand("eval", "spatiotemporal AP, mAP and classification accuracy");
  add_common(eval, f);
  eval->add_option("--tubes", f.tubes, "predicted tubes");
  eval->add_option("--gt", f.gt, "ground-truth tubes");
  add_eval(eval, f);

  auto* synth = app.add_subcommand("synth", "generate a synthetic two-stream corpus with ground truth");
  add_common(synth, f);
  synth->add_option("--spec", f.spec, "scenario spec (JSON)");
  synth->add_option("--out-prefix", f.out_prefix, "writes <prefix>appearance.jsonl, motion.jsonl, gt.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, kUsage, "usage", e.what());
  }

  try {
    if (schema) {
      out << interchange_schema();
      return kOk;
    }
    if (app.get_subcommands().empty()) throw UsageError("a subcommand is required (see --help)");
    const PipelineConfig cfg = build_config(f);
    if (fuse->parsed()) run_fuse(cfg, err);
    if (link->parsed()) run_link(cfg, err);
    if (trim->parsed()) run_trim(cfg, err);
    if (pipeline->parsed()) run_pipeline_cmd(cfg, out, err);
    if (eval->parsed()) run_eval(cfg, out);
    if (synth->parsed()) run_synth(cfg, err);
    return kOk;
  } catch (const UsageError& e) {
    return report_error(err, kUsage, "usage", e.what());
  } catch (const DataError& e) {
    return report_error(err, kData, "data", e.what());
  } catch (const IoError& e) {
    return report_error(err, kIo, "io", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(err, kIo, "io", e.what());
  } catch (const std::exception& e) {
    return report_error(err, kData, "data", e.what());
  }
}

}  // namespace tubelink::cli
