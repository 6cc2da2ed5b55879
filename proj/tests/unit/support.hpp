// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "patternscope/corpus.hpp"

namespace test {

inline std::filesystem::path data_dir() { return PATTERNSCOPE_TEST_DATA; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("patternscope-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline patternscope::ViewNode node(std::string cls, patternscope::IntRect b, bool visible = true,
                                   std::vector<patternscope::ViewNode> children = {},
                                   std::vector<std::string> ancestors = {}) {
  patternscope::ViewNode n;
  n.class_name = std::move(cls);
  n.bounds = b;
  n.visible_to_user = visible;
  n.children = std::move(children);
  n.ancestors = std::move(ancestors);
  return n;
}

inline patternscope::Screen screen(std::string id, patternscope::ViewNode root) {
  patternscope::Screen s;
  s.screen_id = std::move(id);
  s.virtual_extent = {root.bounds.right, root.bounds.bottom};
  s.root = std::move(root);
  return s;
}

}  // namespace test
