// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "patternscope/detector.hpp"

namespace patternscope {

struct KindUsage {
  int candidate_count = 0;
  int verified_count = 0;
  bool uses = false;
  friend bool operator==(const KindUsage&, const KindUsage&) = default;
};

/// Verified per-app usage. Invariant: uses == (verified_count >= 1) and
/// verified_count <= candidate_count.
struct AppComponentUsage {
  std::string package_id;
  std::map<ComponentKind, KindUsage> kinds;

  bool uses(ComponentKind kind) const {
    const auto it = kinds.find(kind);
    return it != kinds.end() && it->second.uses;
  }
  friend bool operator==(const AppComponentUsage&, const AppComponentUsage&) = default;
};

using UsageMap = std::map<std::string, AppComponentUsage>;

/// usage.csv: package,kind,candidate_count,verified_count,uses
void write_usage(const std::filesystem::path& path, const UsageMap& usage);
UsageMap read_usage(const std::filesystem::path& path);

}  // namespace patternscope
