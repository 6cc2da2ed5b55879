// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patternscope/corpus.hpp"

namespace patternscope {

enum class ComponentKind {
  kAppBar,
  kFloatingActionButton,
  kBottomNavigation,
  kNavigationDrawer,
  kSnackBar,
  kTabLayout,
};

inline constexpr std::array<ComponentKind, 6> kAllKinds = {
    ComponentKind::kAppBar,          ComponentKind::kFloatingActionButton,
    ComponentKind::kBottomNavigation, ComponentKind::kNavigationDrawer,
    ComponentKind::kSnackBar,        ComponentKind::kTabLayout,
};

/// Stable report names: "AppBar", "FloatingActionButton", ...
std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> kind_from_string(std::string_view name);
ComponentKind parse_kind(std::string_view name);  // throws DataError

/// Case-insensitive substring rule for one kind.
struct KeywordRule {
  ComponentKind kind;
  std::vector<std::string> keywords;
};

/// The built-in registry; also shipped as data/keywords.conf.
std::vector<KeywordRule> default_rules();

/// Registry text: one `Kind: kw1, kw2` line per rule, '#' comments.
std::vector<KeywordRule> parse_rules(std::string_view text);
std::vector<KeywordRule> load_rules(const std::filesystem::path& path);
std::string format_rules(const std::vector<KeywordRule>& rules);

enum class MatchSource { kClassName, kAncestor };
std::string_view to_string(MatchSource via);
MatchSource parse_match_source(std::string_view text);

struct NodeMatch {
  MatchSource via;
  std::string keyword;
  friend bool operator==(const NodeMatch&, const NodeMatch&) = default;
};

/// Class-name match wins over ancestor match; keywords are tried in rule order.
std::optional<NodeMatch> match_node(const ViewNode& node, const KeywordRule& rule);

struct Detection {
  std::string package_id;
  std::string screen_id;
  ComponentKind kind;
  NodePath node_path;
  IntRect bounds;
  MatchSource matched_via;
  std::string matched_keyword;
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Pre-order DFS. A node with visible_to_user = false is never reported but its
/// subtree is still searched. After a node matches a rule, its subtree is not
/// searched again for that rule.
std::vector<Detection> detect_in_screen(const Screen& screen, const std::vector<KeywordRule>& rules,
                                        const std::string& package_id = {});

using AppDetections = std::map<ComponentKind, std::vector<Detection>>;

/// Per-kind union over all screens; every kind in `rules` gets an entry.
AppDetections detect_in_app(const AppRecord& app, const std::vector<KeywordRule>& rules);

}  // namespace patternscope
