// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patternscope/analytics.hpp"
#include "patternscope/corpus.hpp"
#include "patternscope/detector.hpp"
#include "patternscope/keyvalue.hpp"
#include "patternscope/verifier.hpp"

namespace patternscope {

enum class ClassifierMode { kReference, kExternal };

struct PipelineConfig {
  std::filesystem::path corpus_root;
  std::filesystem::path metadata;
  std::optional<std::filesystem::path> exclusions;
  std::optional<std::filesystem::path> keywords;  // default registry when unset
  std::string hierarchy_extension = ".json";
  std::vector<std::string> screenshot_extensions{".jpg", ".png"};
  int heatmap_cols = kDefaultHeatmapCols;
  int heatmap_rows = kDefaultHeatmapRows;
  double margin_fraction = kDefaultMarginFraction;
  bool mine_negatives = true;
  ClassifierMode classifier = ClassifierMode::kReference;
  std::string external_command;
  double external_threshold = kDefaultDecisionThreshold;
  TrainConfig train;
  std::optional<std::filesystem::path> truth_labels;
  AnalysisOptions analysis;
  std::filesystem::path out = "out";
  std::uint64_t seed = 1;

  /// Relative paths resolve against `base_dir`. Checks that every input path
  /// exists; throws ConfigError otherwise.
  static PipelineConfig from(const KeyValues& kv, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
  void validate() const;
  std::vector<KeywordRule> rules() const;
};

enum class Stage { kIngest, kDetect, kHeatmap, kCrop, kTrain, kVerify, kAnalyze, kReport };
inline constexpr std::array<Stage, 8> kAllStages{Stage::kIngest, Stage::kDetect,  Stage::kHeatmap, Stage::kCrop,
                                                 Stage::kTrain,  Stage::kVerify,  Stage::kAnalyze, Stage::kReport};

std::string_view to_string(Stage stage);
std::optional<Stage> stage_from_string(std::string_view name);
std::vector<Stage> dependencies(Stage stage, const PipelineConfig& config);

struct StageResult {
  Stage stage;
  bool skipped = false;
  std::string fingerprint;
  std::string output_hash;
  std::vector<std::string> notes;
};

/// Runs one stage. Outputs land in `<out>/<stage>/` through a temporary
/// directory renamed into place; `<out>/manifest.json` records the input
/// fingerprint and output hash. A stage whose fingerprint and outputs are
/// unchanged is skipped unless `force`. Throws DependencyError when a
/// prerequisite stage has not produced outputs.
StageResult run_stage(Stage stage, const PipelineConfig& config, bool force = false);

/// All stages in dependency order.
std::vector<StageResult> run_all(const PipelineConfig& config, bool force = false);

// Stage artifact readers, shared with tests and the CLI --------------------

/// Apps and screens as recorded by ingest. Hierarchies are re-parsed only when
/// `with_hierarchy` is set.
std::vector<AppRecord> read_ingested(const std::filesystem::path& ingest_dir, const std::filesystem::path& corpus_root,
                                     bool with_hierarchy);
std::map<std::string, AppDetections> read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const std::map<std::string, AppDetections>& detections);

/// FNV-1a 64 over bytes, as 16 hex digits.
std::string hash_hex(std::string_view bytes);
/// Hash over a directory tree: sorted relative paths and file contents.
std::string hash_tree(const std::filesystem::path& dir);

}  // namespace patternscope
