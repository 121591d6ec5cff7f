#pragma once

// Pipeline configuration: a versioned JSON tree whose keys mirror the CLI
// flags. Values from a config file are applied first; flags override them.

#include <charconv>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/evaluation.hpp"
#include "tubelink/fusion.hpp"
#include "tubelink/pathing.hpp"
#include "tubelink/trimming.hpp"

namespace tubelink {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kWorkersEnv = "TUBELINK_WORKERS";

struct IoPaths {
  std::string appearance;
  std::string motion;
  std::string input;  // `in` for link and trim
  std::string out;
  std::string tubes;
  std::string ground_truth;
  std::string report;
  std::string pr_dump;
  std::string spec;
  std::string out_prefix;
};

struct PipelineConfig {
  int schema_version = kConfigSchemaVersion;
  FusionConfig fusion;
  PathConfig path;
  TrimConfig trim;
  bool two_pass = true;
  EvalConfig eval;
  std::vector<std::string> classes;
  std::map<std::string, double> alpha;  // class name or id -> alpha, resolved by resolve_alpha
  IoPaths io;
  std::size_t workers = 1;
};

// Worker count from the environment, or 1.
inline std::size_t default_workers() {
  const char* env = std::getenv(kWorkersEnv);
  if (!env || !*env) return 1;
  std::size_t n = 0;
  const char* end = env + std::char_traits<char>::length(env);
  auto [ptr, ec] = std::from_chars(env, end, n);
  if (ec != std::errc() || ptr != end || n < 1)
    throw UsageError(std::string(kWorkersEnv) + " must be a positive integer");
  return n;
}

inline PipelineConfig default_config() {
  PipelineConfig cfg;
  cfg.workers = default_workers();
  return cfg;
}

inline EmptyFramePolicy parse_empty_frame_policy(const std::string& s) {
  if (s == "skip-class") return EmptyFramePolicy::skip_class;
  if (s == "stop") return EmptyFramePolicy::stop;
  throw UsageError("empty frame policy must be 'skip-class' or 'stop'");
}

inline BackgroundScoreMode parse_background_mode(const std::string& s) {
  if (s == "complement") return BackgroundScoreMode::complement;
  if (s == "constant") return BackgroundScoreMode::constant;
  throw UsageError("background score mode must be 'complement' or 'constant'");
}

inline ForegroundScores parse_foreground_scores(const std::string& s) {
  if (s == "augmented") return ForegroundScores::augmented;
  if (s == "raw") return ForegroundScores::raw;
  throw UsageError("foreground scores must be 'augmented' or 'raw'");
}

namespace config_detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw UsageError(std::string("config section '") + section + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items())
    if (!ok.contains(k)) throw UsageError(std::string("unknown config key '") + section + "." + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (auto it = j.find(key); it != j.end()) dst = it->get<T>();
}

}  // namespace config_detail

inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j) {
  using namespace config_detail;
  try {
    check_keys(j, "<root>", {"schema_version", "classes", "workers", "fusion", "link", "trim", "eval", "io"});
    read(j, "schema_version", cfg.schema_version);
    if (cfg.schema_version < 1 || cfg.schema_version > kConfigSchemaVersion)
      throw UsageError("unsupported config schema_version " + std::to_string(cfg.schema_version));
    read(j, "classes", cfg.classes);
    if (auto it = j.find("workers"); it != j.end()) {
      const auto n = it->get<long long>();
      if (n < 1) throw UsageError("workers must be >= 1");
      cfg.workers = static_cast<std::size_t>(n);
    }
    if (auto it = j.find("fusion"); it != j.end()) {
      check_keys(*it, "fusion", {"tau"});
      read(*it, "tau", cfg.fusion.tau);
    }
    if (auto it = j.find("link"); it != j.end()) {
      check_keys(*it, "link", {"lambda_o", "max_paths_per_class", "empty_frame_policy", "score_floor"});
      read(*it, "lambda_o", cfg.path.lambda_o);
      read(*it, "max_paths_per_class", cfg.path.max_paths_per_class);
      read(*it, "score_floor", cfg.path.score_floor);
      if (it->contains("empty_frame_policy"))
        cfg.path.empty_frame_policy = parse_empty_frame_policy(it->at("empty_frame_policy").get<std::string>());
    }
    if (auto it = j.find("trim"); it != j.end()) {
      check_keys(*it, "trim",
                 {"enabled", "lambda_l", "alpha_default", "alpha", "top_k", "background_score",
                  "background_constant", "foreground_scores"});
      read(*it, "enabled", cfg.two_pass);
      read(*it, "lambda_l", cfg.trim.lambda_l);
      read(*it, "alpha_default", cfg.trim.alpha_default);
      read(*it, "top_k", cfg.trim.top_k);
      read(*it, "background_constant", cfg.trim.background_constant);
      if (auto a = it->find("alpha"); a != it->end())
        for (const auto& [k, v] : a->items()) cfg.alpha[k] = v.get<double>();
      if (it->contains("background_score"))
        cfg.trim.background_mode = parse_background_mode(it->at("background_score").get<std::string>());
      if (it->contains("foreground_scores"))
        cfg.trim.foreground = parse_foreground_scores(it->at("foreground_scores").get<std::string>());
    }
    if (auto it = j.find("eval"); it != j.end()) {
      check_keys(*it, "eval", {"deltas"});
      read(*it, "deltas", cfg.eval.deltas);
    }
    if (auto it = j.find("io"); it != j.end()) {
      check_keys(*it, "io",
                 {"appearance", "motion", "in", "out", "tubes", "gt", "report", "pr_dump", "spec", "out_prefix"});
      read(*it, "appearance", cfg.io.appearance);
      read(*it, "motion", cfg.io.motion);
      read(*it, "in", cfg.io.input);
      read(*it, "out", cfg.io.out);
      read(*it, "tubes", cfg.io.tubes);
      read(*it, "gt", cfg.io.ground_truth);
      read(*it, "report", cfg.io.report);
      read(*it, "pr_dump", cfg.io.pr_dump);
      read(*it, "spec", cfg.io.spec);
      read(*it, "out_prefix", cfg.io.out_prefix);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
}

inline void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  apply_config_json(cfg, j);
}

inline std::optional<ClassCatalog> catalog(const PipelineConfig& cfg) {
  if (cfg.classes.empty()) return std::nullopt;
  try {
    return ClassCatalog(cfg.classes);
  } catch (const SchemaError& e) {
    throw UsageError(e.what());
  }
}

// Class reference by catalog name or by numeric id.
inline ClassId resolve_class(const std::string& key, const std::optional<ClassCatalog>& classes) {
  if (classes)
    if (auto id = classes->find(key)) return *id;
  ClassId id = -1;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
  if (ec != std::errc() || ptr != key.data() + key.size() || id < 0)
    throw UsageError("unknown class '" + key + "'");
  if (classes && static_cast<std::size_t>(id) >= classes->size())
    throw UsageError("class id " + key + " is outside the catalog");
  return id;
}

// Moves the name-keyed alpha overrides into the trim config.
inline void resolve_alpha(PipelineConfig& cfg) {
  const auto classes = catalog(cfg);
  for (const auto& [key, value] : cfg.alpha) cfg.trim.alpha[resolve_class(key, classes)] = value;
}

inline void validate(const PipelineConfig& cfg) {
  if (cfg.workers < 1) throw UsageError("workers must be >= 1");
  validate(cfg.fusion);
  validate(cfg.path);
  validate(cfg.trim);
  validate(cfg.eval);
}

}  // namespace tubelink
