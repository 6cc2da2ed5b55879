// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patternscope/geometry.hpp"

namespace patternscope {

/// One element of a view hierarchy.
struct ViewNode {
  std::string class_name;
  /// Superclass chain, nearest superclass first.
  std::vector<std::string> ancestors;
  IntRect bounds;
  /// Set when the source rectangle was inverted and had to be normalized.
  bool bounds_flipped = false;
  bool visible_to_user = false;
  std::optional<std::string> resource_id;
  std::vector<ViewNode> children;
  /// Keys the pipeline does not model, kept as raw JSON text so they survive a
  /// round trip. Never interpreted.
  std::map<std::string, std::string> extras;
};

/// Equality on the modeled keys (class, ancestors, bounds, visibility,
/// resource id, children); `extras` is ignored.
bool same_tree(const ViewNode& a, const ViewNode& b);

struct ImageRef {
  std::filesystem::path path;
  Extent pixels;
};

struct Screen {
  std::string screen_id;
  ViewNode root;
  ImageRef screenshot;
  /// Coordinate space the node bounds live in; taken from the root bounds.
  Extent virtual_extent;
  /// Number of nodes whose bounds were normalized on parse.
  int flipped_bounds = 0;
};

struct AppMetadata {
  double avg_rating = 0;
  /// Lower bound of the marketplace install bucket.
  std::uint64_t installs = 0;
  std::string category;
};

enum class ExclusionReason { kNone, kExclusionList, kNoScreens };

std::string_view to_string(ExclusionReason reason);

struct AppRecord {
  std::string package_id;
  std::vector<Screen> screens;
  std::optional<AppMetadata> metadata;
  ExclusionReason exclusion = ExclusionReason::kNone;

  bool excluded() const { return exclusion != ExclusionReason::kNone; }
  /// Included in analytics: not excluded and joined with metadata.
  bool analyzable() const { return !excluded() && metadata.has_value(); }
};

using NodePath = std::vector<int>;

/// "/" for the root, "/0/2" for the third child of the first child.
std::string format_node_path(std::span<const int> path);
NodePath parse_node_path(std::string_view text);
/// Returns nullptr when the path does not resolve.
const ViewNode* resolve_path(const ViewNode& root, std::span<const int> path);
std::size_t count_nodes(const ViewNode& root);

inline constexpr int kMaxHierarchyDepth = 512;

/// Parses one hierarchy document. Accepts either a bare element object or the
/// wrapped form {"activity": {"root": {...}}}. Throws ParseError (with byte
/// offset) for malformed text and SchemaError for a node without "class".
Screen parse_view_hierarchy(std::string_view raw_text, std::string screen_id = {});

/// Serializes a node tree back to the element schema.
std::string serialize_node(const ViewNode& root, int indent = -1);
/// Serializes a screen in the wrapped form.
std::string serialize_screen(const Screen& screen, int indent = -1);

// Metadata ------------------------------------------------------------------

/// "1,000,000+" -> 1000000, "500" -> 500. Returns nullopt when unparseable.
std::optional<std::uint64_t> parse_installs(std::string_view text);

struct RejectedRow {
  int line = 0;
  std::string package_id;
  std::string reason;
};

struct MetadataTable {
  std::map<std::string, AppMetadata> apps;
  std::vector<RejectedRow> rejected;
};

/// Reads `package,avg_rating,installs,category` (CSV) or a JSON array of
/// objects with the same keys. Out-of-range ratings and unparseable installs
/// reject the row; a duplicated package id throws DataError naming it.
MetadataTable load_metadata(const std::filesystem::path& path);
MetadataTable parse_metadata_csv(std::string_view text, const std::string& source = "<memory>");

/// Newline-delimited package ids; blank lines and '#' comments skipped.
std::set<std::string> load_exclusions(const std::filesystem::path& path);

// Corpus assembly -----------------------------------------------------------

struct CorpusLayout {
  std::filesystem::path root;
  std::string hierarchy_extension = ".json";
  std::vector<std::string> screenshot_extensions = {".jpg", ".png"};
};

struct CorpusSummary {
  std::size_t total = 0;
  std::size_t excluded = 0;
  std::size_t metadata_missing = 0;
  std::size_t analyzable = 0;
  std::size_t screens = 0;
  std::size_t dropped_screens = 0;
};

struct Corpus {
  std::vector<AppRecord> apps;
  CorpusSummary summary;
  std::vector<std::string> warnings;
};

/// Walks `<root>/<package_id>/<screen_id>.json` with a sibling screenshot.
/// Apps and screens are visited in lexicographic order.
Corpus assemble_corpus(const CorpusLayout& layout, const MetadataTable& metadata,
                       const std::set<std::string>& exclusions);

/// Recomputes the summary counts for an in-memory app list.
CorpusSummary summarize(const std::vector<AppRecord>& apps);

}  // namespace patternscope
