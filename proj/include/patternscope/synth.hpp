// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "patternscope/corpus.hpp"
#include "patternscope/crop.hpp"
#include "patternscope/detector.hpp"
#include "patternscope/image.hpp"
#include "patternscope/keyvalue.hpp"
#include "patternscope/verifier.hpp"

namespace patternscope {

/// Adoption probability as a linear function of the app's rating percentile
/// (0 = lowest rated, 1 = highest rated).
struct Adoption {
  double low = 0;
  double high = 0;
  double at(double percentile) const { return low + (high - low) * percentile; }
};

struct SynthSpec {
  int app_count = 50;
  int screens_min = 2;
  int screens_max = 4;
  std::map<ComponentKind, Adoption> adoption = default_adoption();
  /// Chance an adopting app shows the component on a given screen (at least
  /// one screen always shows it).
  double presence_rate = 0.7;
  /// Per (screen, kind) chance of a keyword-matching plain-text decoy.
  double decoy_rate = 0.2;
  /// Per planted instance chance of being overdrawn by a keyboard.
  double occlusion_rate = 0.1;
  /// Per screen chance of an invisible keyword-matching node.
  double hidden_rate = 0.05;
  double excluded_rate = 0.0;
  double metadata_missing_rate = 0.0;
  double rating_mean = 4.0;
  double rating_sd = 0.5;
  /// Strength of the link between rating percentile and log installs.
  double install_coupling = 0.5;
  std::vector<std::string> categories = default_categories();
  Extent virtual_extent{1440, 2560};
  std::vector<Extent> screenshot_sizes{{216, 384}, {270, 480}};
  bool render = true;
  std::string screenshot_extension = ".jpg";
  int jpeg_quality = 92;
  std::uint64_t seed = 1;

  static std::map<ComponentKind, Adoption> default_adoption();
  static std::vector<std::string> default_categories();

  /// Throws ConfigError for probabilities outside [0,1], an empty app or
  /// screen range, or occlusion requested while nothing can be adopted.
  void validate() const;
};

/// Overrides fields from `key = value` text (app_count, decoy_rate,
/// adoption.FloatingActionButton = 0.05 0.40, ...).
SynthSpec synth_spec_from(const KeyValues& kv, SynthSpec base = {});

struct GroundTruthRow {
  std::string package_id;
  ComponentKind kind;
  bool uses = false;
  int planted_count = 0;
  int occluded_count = 0;
  int decoy_count = 0;
};

enum class NodeRole { kPlanted, kOccluded, kDecoy };
std::string_view to_string(NodeRole role);

struct NodeTruthRow {
  std::string package_id;
  std::string screen_id;
  NodePath node_path;
  ComponentKind kind;
  NodeRole role;
  IntRect bounds;
};

struct SynthCorpus {
  std::vector<AppRecord> apps;
  /// Rendered screenshots keyed by (package, screen); empty when render = false.
  std::map<std::pair<std::string, std::string>, Image8> screenshots;
  std::vector<GroundTruthRow> truth;
  std::vector<NodeTruthRow> nodes;
  MetadataTable metadata;
  std::set<std::string> exclusions;
  /// Rating percentile per package.
  std::map<std::string, double> percentile;

  bool uses(const std::string& package_id, ComponentKind kind) const;
  /// Loader over the in-memory screenshots.
  ScreenshotLoader loader() const;
  CropTruth crop_truth() const;
};

/// Deterministic for a fixed spec: every app draws from its own stream
/// derived from (seed, package id).
SynthCorpus generate(const SynthSpec& spec);

/// Writes `<out>/apps/<package>/<screen>.json|.jpg`, metadata.csv,
/// exclusions.txt, ground_truth.csv and node_truth.csv.
void write_corpus(const SynthCorpus& corpus, const SynthSpec& spec, const std::filesystem::path& out);

/// generate + write_corpus without holding every screenshot in memory. The
/// returned corpus has no screenshots.
SynthCorpus synthesize_to(const SynthSpec& spec, const std::filesystem::path& out);

/// "1,000,000+"
std::string format_installs(std::uint64_t installs);

/// Glyph colors per kind, used by tests that count planted pixels.
Rgb glyph_color(ComponentKind kind);

}  // namespace patternscope
