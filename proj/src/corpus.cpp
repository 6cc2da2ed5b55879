// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "patternscope/csv.hpp"
#include "patternscope/error.hpp"
#include "patternscope/image.hpp"

namespace patternscope {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int to_coord(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError("non-numeric bounds at " + path, path);
  return static_cast<int>(std::lround(v.get<double>()));
}

ViewNode convert_node(const json& j, NodePath& path, int* flipped) {
  const std::string where = format_node_path(path);
  if (!j.is_object()) throw SchemaError("node is not an object at " + where, where);
  if (path.size() > static_cast<std::size_t>(kMaxHierarchyDepth))
    throw SchemaError("hierarchy deeper than " + std::to_string(kMaxHierarchyDepth) + " at " + where,
                      where);
  ViewNode node;
  auto cls = j.find("class");
  if (cls == j.end() || !cls->is_string())
    throw SchemaError("missing \"class\" at node " + where, where);
  node.class_name = cls->get<std::string>();

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "class") continue;
    if (key == "ancestors") {
      if (v.is_array())
        for (const json& a : v)
          if (a.is_string()) node.ancestors.push_back(a.get<std::string>());
    } else if (key == "bounds") {
      if (!v.is_array() || v.size() != 4)
        throw SchemaError("bounds must be a 4-element array at " + where, where);
      IntRect r{to_coord(v[0], where), to_coord(v[1], where), to_coord(v[2], where),
                to_coord(v[3], where)};
      if (!r.is_normalized()) {
        r = r.normalized();
        node.bounds_flipped = true;
        ++*flipped;
      }
      node.bounds = r;
    } else if (key == "visible-to-user") {
      node.visible_to_user = v.is_boolean() && v.get<bool>();
    } else if (key == "resource-id") {
      if (v.is_string()) node.resource_id = v.get<std::string>();
    } else if (key == "children") {
      if (!v.is_array()) continue;
      int index = 0;
      for (const json& child : v) {
        // Captured hierarchies contain null placeholders in some child arrays; they are not elements.
        if (child.is_null()) continue;
        path.push_back(index++);
        node.children.push_back(convert_node(child, path, flipped));
        path.pop_back();
      }
    } else {
      node.extras.emplace(key, v.dump());
    }
  }
  return node;
}

ordered_json node_to_json(const ViewNode& n) {
  ordered_json j;
  j["class"] = n.class_name;
  j["ancestors"] = n.ancestors;
  j["bounds"] = {n.bounds.left, n.bounds.top, n.bounds.right, n.bounds.bottom};
  j["visible-to-user"] = n.visible_to_user;
  if (n.resource_id) j["resource-id"] = *n.resource_id;
  for (const auto& [k, v] : n.extras) j[k] = ordered_json::parse(v);
  if (!n.children.empty()) {
    ordered_json kids = ordered_json::array();
    for (const auto& c : n.children) kids.push_back(node_to_json(c));
    j["children"] = std::move(kids);
  }
  return j;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void add_metadata_row(MetadataTable& table, int line, const std::string& package,
                      const std::string& rating_text, const std::string& installs_text,
                      const std::string& category, const std::string& source) {
  if (package.empty()) {
    table.rejected.push_back({line, package, "empty package id"});
    return;
  }
  if (table.apps.count(package))
    throw DataError(source + ": duplicate package id '" + package + "'");
  double rating = 0;
  try {
    std::size_t used = 0;
    rating = std::stod(rating_text, &used);
    if (used != rating_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    table.rejected.push_back({line, package, "unparseable rating '" + rating_text + "'"});
    return;
  }
  if (!(rating >= 0.0 && rating <= 5.0)) {
    table.rejected.push_back({line, package, "rating out of [0,5]: " + rating_text});
    return;
  }
  const auto installs = parse_installs(installs_text);
  if (!installs) {
    table.rejected.push_back({line, package, "unparseable installs '" + installs_text + "'"});
    return;
  }
  if (category.empty()) {
    table.rejected.push_back({line, package, "empty category"});
    return;
  }
  table.apps.emplace(package, AppMetadata{rating, *installs, category});
}

}  // namespace

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::kNone: return "none";
    case ExclusionReason::kExclusionList: return "exclusion_list";
    case ExclusionReason::kNoScreens: return "no_screens";
  }
  return "unknown";
}

bool same_tree(const ViewNode& a, const ViewNode& b) {
  if (a.class_name != b.class_name || a.ancestors != b.ancestors || a.bounds != b.bounds ||
      a.visible_to_user != b.visible_to_user || a.resource_id != b.resource_id ||
      a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same_tree(a.children[i], b.children[i])) return false;
  return true;
}

std::string format_node_path(std::span<const int> path) {
  if (path.empty()) return "/";
  std::string out;
  for (int i : path) out += "/" + std::to_string(i);
  return out;
}

NodePath parse_node_path(std::string_view text) {
  NodePath path;
  if (text.empty() || text == "/") return path;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] != '/') throw DataError("bad node path: " + std::string(text));
    const std::size_t next = text.find('/', pos + 1);
    const std::string part(text.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1));
    if (part.empty() || !std::all_of(part.begin(), part.end(), ::isdigit))
      throw DataError("bad node path: " + std::string(text));
    path.push_back(std::stoi(part));
    pos = next == std::string_view::npos ? text.size() : next;
  }
  return path;
}

const ViewNode* resolve_path(const ViewNode& root, std::span<const int> path) {
  const ViewNode* n = &root;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= n->children.size()) return nullptr;
    n = &n->children[static_cast<std::size_t>(i)];
  }
  return n;
}

std::size_t count_nodes(const ViewNode& root) {
  std::size_t n = 1;
  for (const auto& c : root.children) n += count_nodes(c);
  return n;
}

Screen parse_view_hierarchy(std::string_view raw_text, std::string screen_id) {
  json doc;
  try {
    doc = json::parse(raw_text.begin(), raw_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed hierarchy document: ") + e.what(), e.byte);
  }
  const json* root = &doc;
  if (doc.is_object() && doc.contains("activity") && doc["activity"].is_object() &&
      doc["activity"].contains("root"))
    root = &doc["activity"]["root"];
  if (!root->is_object()) throw SchemaError("document has no root element object", "/");

  Screen screen;
  screen.screen_id = std::move(screen_id);
  NodePath path;
  screen.root = convert_node(*root, path, &screen.flipped_bounds);
  screen.virtual_extent = {screen.root.bounds.right, screen.root.bounds.bottom};
  if (!screen.virtual_extent.positive())
    throw SchemaError("root bounds give an empty coordinate space", "/");
  return screen;
}

std::string serialize_node(const ViewNode& root, int indent) {
  return node_to_json(root).dump(indent);
}

std::string serialize_screen(const Screen& screen, int indent) {
  ordered_json j;
  j["activity"]["root"] = node_to_json(screen.root);
  return j.dump(indent);
}

std::optional<std::uint64_t> parse_installs(std::string_view text) {
  std::string s = trim(text);
  if (!s.empty() && s.back() == '+') s.pop_back();
  std::string digits;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
    } else if (c == ',' && i > 0 && i + 1 < s.size()) {
      continue;
    } else {
      return std::nullopt;
    }
  }
  if (digits.empty() || digits.size() > 19) return std::nullopt;
  return std::stoull(digits);
}

MetadataTable parse_metadata_csv(std::string_view text, const std::string& source) {
  const csv::Table t = csv::parse(text);
  const int c_pkg = t.require("package", source);
  const int c_rating = t.require("avg_rating", source);
  const int c_installs = t.require("installs", source);
  const int c_category = t.require("category", source);
  MetadataTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const int line = t.lines[r];
    const auto field = [&](int c) { return c < static_cast<int>(row.size()) ? trim(row[c]) : std::string(); };
    if (row.size() < t.header.size()) {
      table.rejected.push_back({line, field(c_pkg), "short row"});
      continue;
    }
    add_metadata_row(table, line, field(c_pkg), field(c_rating), field(c_installs),
                     field(c_category), source);
  }
  return table;
}

MetadataTable load_metadata(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (path.extension() != ".json") return parse_metadata_csv(text, path.string());

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte);
  }
  if (!doc.is_array()) throw SchemaError(path.string() + ": expected an array of rows", "/");
  MetadataTable table;
  int line = 0;
  for (const json& row : doc) {
    ++line;
    const auto text_of = [&](const char* key) -> std::string {
      if (!row.contains(key)) return {};
      const json& v = row[key];
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    add_metadata_row(table, line, text_of("package"), text_of("avg_rating"), text_of("installs"),
                     text_of("category"), path.string());
  }
  return table;
}

std::set<std::string> load_exclusions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read exclusion list " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string id = trim(line);
    if (!id.empty()) out.insert(std::move(id));
  }
  return out;
}

CorpusSummary summarize(const std::vector<AppRecord>& apps) {
  CorpusSummary s;
  s.total = apps.size();
  for (const auto& a : apps) {
    s.screens += a.screens.size();
    if (a.excluded())
      ++s.excluded;
    else if (!a.metadata)
      ++s.metadata_missing;
    else
      ++s.analyzable;
  }
  return s;
}

Corpus assemble_corpus(const CorpusLayout& layout, const MetadataTable& metadata,
                       const std::set<std::string>& exclusions) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(layout.root))
    throw IoError("corpus root is not a directory: " + layout.root.string());

  std::vector<fs::path> app_dirs;
  for (const auto& e : fs::directory_iterator(layout.root))
    if (e.is_directory()) app_dirs.push_back(e.path());
  std::sort(app_dirs.begin(), app_dirs.end());
  if (app_dirs.empty()) throw DataError("empty corpus: no package directories under " + layout.root.string());

  Corpus corpus;
  std::size_t dropped = 0;
  for (const fs::path& dir : app_dirs) {
    AppRecord app;
    app.package_id = dir.filename().string();

    std::vector<fs::path> docs;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == layout.hierarchy_extension)
        docs.push_back(e.path());
    std::sort(docs.begin(), docs.end());

    for (const fs::path& doc : docs) {
      const std::string screen_id = doc.stem().string();
      std::optional<fs::path> shot;
      for (const auto& ext : layout.screenshot_extensions) {
        fs::path candidate = dir / (screen_id + ext);
        if (fs::exists(candidate)) {
          shot = candidate;
          break;
        }
      }
      if (!shot) {
        corpus.warnings.push_back(app.package_id + "/" + screen_id + ": screenshot missing, screen dropped");
        ++dropped;
        continue;
      }
      try {
        Screen s = parse_view_hierarchy(read_file(doc), screen_id);
        s.screenshot = {*shot, probe_image(*shot)};
        if (!s.screenshot.pixels.positive())
          throw IoError("screenshot has empty dimensions: " + shot->string());
        if (s.flipped_bounds > 0)
          corpus.warnings.push_back(app.package_id + "/" + screen_id + ": " +
                                    std::to_string(s.flipped_bounds) + " inverted bounds normalized");
        app.screens.push_back(std::move(s));
      } catch (const Error& e) {
        corpus.warnings.push_back(app.package_id + "/" + screen_id + ": " + e.what() + ", screen dropped");
        ++dropped;
      }
    }

    if (exclusions.count(app.package_id))
      app.exclusion = ExclusionReason::kExclusionList;
    else if (app.screens.empty())
      app.exclusion = ExclusionReason::kNoScreens;
    if (auto it = metadata.apps.find(app.package_id); it != metadata.apps.end())
      app.metadata = it->second;
    corpus.apps.push_back(std::move(app));
  }
  corpus.summary = summarize(corpus.apps);
  corpus.summary.dropped_screens = dropped;
  return corpus;
}

}  // namespace patternscope
