// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/detector.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "patternscope/error.hpp"

namespace patternscope {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool contains_ci(std::string_view haystack, const std::string& needle_lower) {
  return lower(haystack).find(needle_lower) != std::string::npos;
}

void search(const ViewNode& node, const std::vector<KeywordRule>& rules, std::vector<bool>& active,
            NodePath& path, const Screen& screen, const std::string& package_id,
            std::vector<Detection>& out) {
  std::vector<std::size_t> pruned;
  if (node.visible_to_user) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (!active[r]) continue;
      if (auto m = match_node(node, rules[r])) {
        out.push_back({package_id, screen.screen_id, rules[r].kind, path, node.bounds, m->via,
                       m->keyword});
        active[r] = false;
        pruned.push_back(r);
      }
    }
  }
  if (std::find(active.begin(), active.end(), true) != active.end()) {
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      search(node.children[i], rules, active, path, screen, package_id, out);
      path.pop_back();
    }
  }
  for (std::size_t r : pruned) active[r] = true;
}

}  // namespace

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kAppBar: return "AppBar";
    case ComponentKind::kFloatingActionButton: return "FloatingActionButton";
    case ComponentKind::kBottomNavigation: return "BottomNavigation";
    case ComponentKind::kNavigationDrawer: return "NavigationDrawer";
    case ComponentKind::kSnackBar: return "SnackBar";
    case ComponentKind::kTabLayout: return "TabLayout";
  }
  return "Unknown";
}

std::optional<ComponentKind> kind_from_string(std::string_view name) {
  for (ComponentKind k : kAllKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

ComponentKind parse_kind(std::string_view name) {
  if (auto k = kind_from_string(name)) return *k;
  throw DataError("unknown component kind '" + std::string(name) + "'");
}

std::string_view to_string(MatchSource via) {
  return via == MatchSource::kClassName ? "class" : "ancestor";
}

MatchSource parse_match_source(std::string_view text) {
  if (text == "class") return MatchSource::kClassName;
  if (text == "ancestor") return MatchSource::kAncestor;
  throw DataError("unknown match source '" + std::string(text) + "'");
}

std::vector<KeywordRule> default_rules() {
  return {
      {ComponentKind::kAppBar, {"appbar", "toolbar", "actionbar"}},
      {ComponentKind::kFloatingActionButton, {"float"}},
      {ComponentKind::kBottomNavigation, {"bottomnavigation", "bottom_nav"}},
      {ComponentKind::kNavigationDrawer, {"drawer"}},
      {ComponentKind::kSnackBar, {"snack"}},
      {ComponentKind::kTabLayout, {"tablayout", "tabbar", "slidingtab"}},
  };
}

std::vector<KeywordRule> parse_rules(std::string_view text) {
  std::vector<KeywordRule> rules;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ConfigError("keyword registry line " + std::to_string(lineno) + ": expected 'Kind: keywords'");
    const std::string name = trim(std::string_view(line).substr(0, colon));
    const auto kind = kind_from_string(name);
    if (!kind)
      throw ConfigError("keyword registry line " + std::to_string(lineno) + ": unknown kind '" + name + "'");
    if (std::any_of(rules.begin(), rules.end(), [&](const KeywordRule& r) { return r.kind == *kind; }))
      throw ConfigError("keyword registry line " + std::to_string(lineno) + ": duplicate kind '" + name + "'");
    KeywordRule rule{*kind, {}};
    std::istringstream kws(line.substr(colon + 1));
    std::string kw;
    while (std::getline(kws, kw, ',')) {
      std::string k = lower(trim(kw));
      if (k.empty())
        throw ConfigError("keyword registry line " + std::to_string(lineno) + ": empty keyword");
      rule.keywords.push_back(std::move(k));
    }
    if (rule.keywords.empty())
      throw ConfigError("keyword registry line " + std::to_string(lineno) + ": no keywords");
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<KeywordRule> load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read keyword registry " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

std::string format_rules(const std::vector<KeywordRule>& rules) {
  std::string out;
  for (const auto& r : rules) {
    out += std::string(to_string(r.kind)) + ":";
    for (std::size_t i = 0; i < r.keywords.size(); ++i) out += (i ? ", " : " ") + r.keywords[i];
    out += "\n";
  }
  return out;
}

std::optional<NodeMatch> match_node(const ViewNode& node, const KeywordRule& rule) {
  for (const auto& kw : rule.keywords) {
    if (contains_ci(node.class_name, lower(kw))) return NodeMatch{MatchSource::kClassName, kw};
  }
  for (const auto& kw : rule.keywords) {
    const std::string k = lower(kw);
    for (const auto& a : node.ancestors)
      if (contains_ci(a, k)) return NodeMatch{MatchSource::kAncestor, kw};
  }
  return std::nullopt;
}

std::vector<Detection> detect_in_screen(const Screen& screen, const std::vector<KeywordRule>& rules,
                                        const std::string& package_id) {
  std::vector<Detection> out;
  std::vector<bool> active(rules.size(), true);
  NodePath path;
  search(screen.root, rules, active, path, screen, package_id, out);
  return out;
}

AppDetections detect_in_app(const AppRecord& app, const std::vector<KeywordRule>& rules) {
  AppDetections out;
  for (const auto& r : rules) out[r.kind];
  for (const auto& s : app.screens)
    for (auto& d : detect_in_screen(s, rules, app.package_id)) out[d.kind].push_back(std::move(d));
  return out;
}

}  // namespace patternscope
